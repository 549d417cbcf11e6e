#pragma once

// Parameter and geometry types for the thin-film limit model.

#include <cmath>
#include <cstddef>
#include <algorithm>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace micro_reynolds {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
/// Counter-clockwise quarter turn, (a, b) -> (-b, a).
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

/// 2 N sqrt((1 - N^2) / Rc).
inline double compute_k(double coupling, double microrotation) {
    if (!(coupling > 0.0 && coupling < 1.0)) {
        std::ostringstream os;
        os << "coupling number N must lie in (0, 1), got " << coupling;
        throw DomainError(os.str());
    }
    if (!(microrotation > 0.0) || !std::isfinite(microrotation)) {
        std::ostringstream os;
        os << "microrotation number Rc must be positive, got " << microrotation;
        throw DomainError(os.str());
    }
    return 2.0 * coupling * std::sqrt((1.0 - coupling * coupling) / microrotation);
}

/// Coupling number N, microrotation number Rc and the derived wavenumber k.
class FluidParams {
public:
    FluidParams(double coupling, double microrotation)
        : n_(coupling), rc_(microrotation), k_(compute_k(coupling, microrotation)) {}

    double N() const noexcept { return n_; }
    double N2() const noexcept { return n_ * n_; }
    double Rc() const noexcept { return rc_; }
    double k() const noexcept { return k_; }
    /// 1 - N^2, the coercivity constant of the reduced system.
    double one_minus_N2() const noexcept { return 1.0 - n_ * n_; }

    friend bool operator==(const FluidParams&, const FluidParams&) = default;

private:
    double n_;
    double rc_;
    double k_;
};

struct PerfectSlip {
    friend constexpr bool operator==(PerfectSlip, PerfectSlip) = default;
};
struct NoSlip {
    friend constexpr bool operator==(NoSlip, NoSlip) = default;
};
/// Navier condition u'(0) = lambda u(0) at the bottom wall.
class PartialSlip {
public:
    explicit PartialSlip(double lambda) : lambda_(lambda) {
        if (!(lambda > 0.0) || !std::isfinite(lambda)) {
            std::ostringstream os;
            os << "partial slip requires a friction coefficient in (0, inf), got " << lambda;
            throw DomainError(os.str());
        }
    }
    double lambda() const noexcept { return lambda_; }
    friend bool operator==(PartialSlip, PartialSlip) = default;

private:
    double lambda_;
};

using SlipRegime = std::variant<PerfectSlip, PartialSlip, NoSlip>;

inline std::string regime_name(const SlipRegime& r) {
    if (std::holds_alternative<PerfectSlip>(r)) return "perfect";
    if (std::holds_alternative<NoSlip>(r)) return "noslip";
    return "partial";
}

/// Limit regime selected by the slip scaling exponent gamma. The comparison
/// with -1 is exact.
inline SlipRegime regime_from_gamma(double gamma, double lambda) {
    if (gamma > -1.0) return PerfectSlip{};
    if (gamma == -1.0) return PartialSlip{lambda};
    return NoSlip{};
}

struct Rectangle {
    double lx = 1.0;
    double ly = 1.0;
};

using PlanarScalar = std::function<double(double, double)>;
using PlanarVector = std::function<Vec2(double, double)>;

namespace height {

inline PlanarScalar constant(double h0) {
    return [h0](double, double) { return h0; };
}

/// h0 + ax x + ay y
inline PlanarScalar affine(double h0, double ax, double ay) {
    return [=](double x, double y) { return h0 + ax * x + ay * y; };
}

/// h0 + amplitude sin(kx x) sin(ky y)
inline PlanarScalar sinusoidal(double h0, double amplitude, double kx, double ky) {
    return [=](double x, double y) { return h0 + amplitude * std::sin(kx * x) * std::sin(ky * y); };
}

/// Bilinear interpolation of samples on a uniform (nx+1) x (ny+1) node grid
/// covering the rectangle, row-major in x. Points outside are clamped.
inline PlanarScalar bilinear_grid(Rectangle domain, std::size_t nx, std::size_t ny,
                                  std::vector<double> values) {
    if (nx < 1 || ny < 1 || values.size() != (nx + 1) * (ny + 1)) {
        throw DomainError("bilinear height grid needs (nx+1)*(ny+1) samples with nx, ny >= 1");
    }
    return [=, values = std::move(values)](double x, double y) {
        const double sx = std::clamp(x / domain.lx, 0.0, 1.0) * static_cast<double>(nx);
        const double sy = std::clamp(y / domain.ly, 0.0, 1.0) * static_cast<double>(ny);
        const auto i = std::min(static_cast<std::size_t>(sx), nx - 1);
        const auto j = std::min(static_cast<std::size_t>(sy), ny - 1);
        const double tx = sx - static_cast<double>(i);
        const double ty = sy - static_cast<double>(j);
        auto at = [&](std::size_t a, std::size_t b) { return values[b * (nx + 1) + a]; };
        return (1 - tx) * (1 - ty) * at(i, j) + tx * (1 - ty) * at(i + 1, j) +
               (1 - tx) * ty * at(i, j + 1) + tx * ty * at(i + 1, j + 1);
    };
}

} // namespace height

/// The planar domain and the gap height h(x') with declared bounds
/// 0 < h_min <= h <= h_max.
class FilmGeometry {
public:
    FilmGeometry(Rectangle domain, PlanarScalar h, double h_min, double h_max)
        : domain_(domain), h_(std::move(h)), h_min_(h_min), h_max_(h_max) {
        if (!(domain.lx > 0.0 && domain.ly > 0.0)) throw DomainError("domain sides must be positive");
        if (!(h_min > 0.0 && h_min <= h_max)) throw DomainError("height bounds need 0 < h_min <= h_max");
        if (!h_) throw DomainError("height function is empty");
    }

    const Rectangle& domain() const noexcept { return domain_; }
    double h_min() const noexcept { return h_min_; }
    double h_max() const noexcept { return h_max_; }

    double height(double x, double y) const {
        const double h = h_(x, y);
        if (!(h >= h_min_ && h <= h_max_)) {
            std::ostringstream os;
            os.precision(17);
            os << "height " << h << " at (" << x << ", " << y << ") is outside [" << h_min_ << ", "
               << h_max_ << "]";
            throw DomainError(os.str());
        }
        return h;
    }

    void validate_nodes(std::span<const Vec2> nodes) const {
        for (const auto& p : nodes) (void)height(p.x, p.y);
    }

private:
    Rectangle domain_;
    PlanarScalar h_;
    double h_min_;
    double h_max_;
};

/// Body force f'(x') and microrotation source g'(x'), both independent of z3.
struct BodyForces {
    PlanarVector f = [](double, double) { return Vec2{}; };
    PlanarVector g = [](double, double) { return Vec2{}; };
};

} // namespace micro_reynolds

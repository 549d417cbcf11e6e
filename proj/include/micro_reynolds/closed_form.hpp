#pragma once

// Transverse velocity/microrotation profiles of the reduced thin-film system
// and the depth-averaged mobilities that enter the Reynolds equation.
//
// For one planar component the transverse problem reads
//
//   -u'' + 2 N^2 W'              = -a          a = (dp/dx_i - f_i)
//   -Rc W'' + 4 N^2 W - 2 N^2 u' =  b
//
// with u(h) = W(0) = W(h) = 0 and the regime condition on u at z3 = 0.
// Component 1 is (u1, w2) with (a, b) = (F1, g2); component 2 is (u2, -w1)
// with (a, b) = (F2, -g1). Every solution has the form
//
//   W(z) = A (cosh kz - 1) + B sinh kz + a z / (2 (1 - N^2))
//   u(z) = a z^2 / (2 (1 - N^2)) + (2 N^2 / k) (A (sinh kz - kz) + B (cosh kz - 1))
//          + u'(0) z + u(0)
//
// and the regime fixes (A, B, u'(0), u(0)) through a 2x2 coefficient system.
// Large k h uses an equivalent exponentially scaled form (TransverseSolution).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <variant>

#include "core_model.hpp"
#include "errors.hpp"
#include "hyperbolic.hpp"

namespace micro_reynolds {

/// Largest k h accepted; beyond it cosh(k h) overflows.
inline constexpr double kMaxKh = 700.0;

struct Mat2 {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;

    double det() const { return a11 * a22 - a12 * a21; }
    double frobenius2() const { return a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22; }
};

struct Solve2 {
    double x1 = 0, x2 = 0;
    /// max-norm residual relative to max(|rhs|, ||Q|| |x|)
    double residual = 0;
};

inline Solve2 solve_2x2(const Mat2& q, double r1, double r2, const char* what) {
    const double d = q.det();
    if (!(std::abs(d) >= 1e-14 * q.frobenius2())) {
        std::ostringstream os;
        os.precision(17);
        os << what << ": |det Q| = " << std::abs(d) << " below 1e-14 ||Q||^2 = " << 1e-14 * q.frobenius2();
        throw SingularCoefficientSystem(os.str());
    }
    Solve2 s;
    s.x1 = (r1 * q.a22 - q.a12 * r2) / d;
    s.x2 = (q.a11 * r2 - q.a21 * r1) / d;
    const double e1 = q.a11 * s.x1 + q.a12 * s.x2 - r1;
    const double e2 = q.a21 * s.x1 + q.a22 * s.x2 - r2;
    const double scale = std::max({std::abs(r1), std::abs(r2),
                                   std::sqrt(q.frobenius2()) * std::max(std::abs(s.x1), std::abs(s.x2)),
                                   std::numeric_limits<double>::min()});
    s.residual = std::max(std::abs(e1), std::abs(e2)) / scale;
    return s;
}

namespace detail {

inline double checked_kh(double h, const FluidParams& p) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        std::ostringstream os;
        os << "film height must be positive, got " << h;
        throw DomainError(os.str());
    }
    const double kh = p.k() * h;
    if (kh > kMaxKh) {
        std::ostringstream os;
        os << "k h = " << kh << " exceeds " << kMaxKh << " (hyperbolic terms overflow)";
        throw DomainError(os.str());
    }
    return kh;
}

inline double rel_gap(double a, double b) {
    if (a == b) return 0.0;
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

} // namespace detail

// ---------------------------------------------------------------------------
// Coefficient systems
// ---------------------------------------------------------------------------

/// Partial-slip matrix for u'(0) = lambda u(0).
inline Mat2 q_lambda(double h, const FluidParams& p, double lambda) {
    const double kh = detail::checked_kh(h, p);
    const double c = 2.0 * p.N2() / p.k();
    return {c * std::sinh(kh) - 2.0 * h - 2.0 / lambda * p.one_minus_N2(), c * hyp::coshm1(kh),
            hyp::coshm1(kh), std::sinh(kh)};
}

/// The matrix exactly as printed with the partial-slip closed forms. It carries
/// +2/lambda (1 - N^2) in its first entry, which corresponds to the condition
/// u'(0) = -lambda u(0).
inline Mat2 q_lambda_printed(double h, const FluidParams& p, double lambda) {
    const double kh = detail::checked_kh(h, p);
    const double c = 2.0 * p.N2() / p.k();
    return {c * std::sinh(kh) - 2.0 * h + 2.0 / lambda * p.one_minus_N2(), c * hyp::coshm1(kh),
            hyp::coshm1(kh), std::sinh(kh)};
}

/// Perfect-slip matrix acting on (B, D).
inline Mat2 q_zero(double h, const FluidParams& p) {
    const double kh = detail::checked_kh(h, p);
    return {2.0 * p.N2() / p.k() * std::cosh(kh), 1.0, std::sinh(kh), 0.0};
}

struct PartialSlipQuad {
    double A1 = 0, B1 = 0, A2 = 0, B2 = 0;
};

namespace printed {

/// Printed closed forms for the partial-slip unit-load coefficients.
inline PartialSlipQuad partial_coefficients(double h, const FluidParams& p, double lambda) {
    const double kh = detail::checked_kh(h, p);
    const double c = 2.0 * p.N2() / p.k();
    const double t = std::tanh(0.5 * kh);
    const double den = c * t - h + p.one_minus_N2() / lambda;
    PartialSlipQuad q;
    q.A1 = -0.5 * (h - c * t) / (h - c * t - p.one_minus_N2() / lambda);
    q.B1 = 0.5 * hyp::coth(0.5 * kh) *
           (c * t - h + 2.0 / lambda * p.one_minus_N2() / (1.0 + std::cosh(kh))) / den;
    q.A2 = 0.5 / den;
    q.B2 = -0.5 * t / den;
    return q;
}

} // namespace printed

struct PartialSlipCoefficients {
    double A1 = 0, B1 = 0, A2 = 0, B2 = 0;
    /// worst relative residual of the two 2x2 solves
    double residual = 0;
    /// printed closed forms evaluated at the same point
    PartialSlipQuad printed;
    /// max relative difference between the solved and printed coefficients
    double printed_gap = 0;
};

inline PartialSlipCoefficients coeffs_partial(double h, const FluidParams& p, double lambda) {
    const Mat2 q = q_lambda(h, p, lambda);
    const Solve2 s1 = solve_2x2(q, h, 1.0, "partial slip coefficient system");
    const Solve2 s2 = solve_2x2(q, 1.0, 0.0, "partial slip coefficient system");
    PartialSlipCoefficients c{s1.x1, s1.x2, s2.x1, s2.x2, std::max(s1.residual, s2.residual), {}, 0.0};
    c.printed = printed::partial_coefficients(h, p, lambda);
    c.printed_gap = std::max({detail::rel_gap(c.A1, c.printed.A1), detail::rel_gap(c.B1, c.printed.B1),
                              detail::rel_gap(c.A2, c.printed.A2), detail::rel_gap(c.B2, c.printed.B2)});
    return c;
}

struct NoSlipCoefficients {
    double A1 = -0.5, B1 = 0, A2 = 0, B2 = 0;
};

/// No-slip unit-load coefficients, evaluated from their closed forms.
inline NoSlipCoefficients coeffs_noslip(double h, const FluidParams& p) {
    const double kh = detail::checked_kh(h, p);
    const double c = 2.0 * p.N2() / p.k();
    const double t = std::tanh(0.5 * kh);
    const double den = c * t - h;
    return {-0.5, 0.5 * hyp::coth(0.5 * kh), 0.5 / den, -0.5 * t / den};
}

struct PerfectSlipQuad {
    double B1 = 0, D1 = 0, B2 = 0, D2 = 0;
};

namespace printed {

/// Perfect-slip (B, D) coefficients as printed, including the sin() in D2.
inline PerfectSlipQuad perfect_coefficients(double h, const FluidParams& p) {
    const double kh = detail::checked_kh(h, p);
    const double k = p.k();
    const double c = 2.0 * p.N2() / k;
    return {1.0 / std::sinh(kh), h - c * std::cosh(kh), 0.5 / p.N2() * hyp::coth(0.5 * kh),
            h + std::sin(kh) / k - (1.0 + std::cosh(kh)) * std::cosh(kh) / k};
}

} // namespace printed

struct PerfectSlipCoefficients {
    double B1 = 0, D1 = 0, B2 = 0, D2 = 0;
    double residual = 0;
    PerfectSlipQuad printed;
    double printed_gap = 0;
};

/// Solves Q0 (B1, D1) = (h, 1) and Q0 (B2, D2) = (h - sinh(kh)/k, (1 - cosh kh)/(2 N^2)).
inline PerfectSlipCoefficients coeffs_perfect(double h, const FluidParams& p) {
    const double kh = detail::checked_kh(h, p);
    const Mat2 q = q_zero(h, p);
    const Solve2 s1 = solve_2x2(q, h, 1.0, "perfect slip coefficient system");
    const Solve2 s2 = solve_2x2(q, h - std::sinh(kh) / p.k(), -hyp::coshm1(kh) / (2.0 * p.N2()),
                                "perfect slip coefficient system");
    PerfectSlipCoefficients c{s1.x1, s1.x2, s2.x1, s2.x2, std::max(s1.residual, s2.residual), {}, 0.0};
    c.printed = printed::perfect_coefficients(h, p);
    c.printed_gap = std::max({detail::rel_gap(c.B1, c.printed.B1), detail::rel_gap(c.D1, c.printed.D1),
                              detail::rel_gap(c.B2, c.printed.B2), detail::rel_gap(c.D2, c.printed.D2)});
    return c;
}

// ---------------------------------------------------------------------------
// Scalar transverse solution
// ---------------------------------------------------------------------------

/// One planar component of the transverse solution, see the header comment.
///
/// For k h above kScaledFormKh the hyperbolic coefficients A, B grow like
/// e^{kh} and cancel in W, so the solution is stored instead as
///
///   W(z) = P + a z / (2 (1 - N^2)) - (P sinh k(h - z) + Q sinh kz) / sinh kh
///
/// with P = -W_h(0), Q = -W_h(h), evaluated through expm1 ratios.
class TransverseSolution {
public:
    TransverseSolution(const FluidParams& p, double h, double a, double A, double B, double slope0,
                       double u0)
        : k_(p.k()), n2_(p.N2()), omn2_(p.one_minus_N2()), h_(h), a_(a), A_(A), B_(B),
          slope0_(slope0), u0_(u0) {}

    static TransverseSolution scaled(const FluidParams& p, double h, double a, double P, double S, double u0) {
        TransverseSolution s(p, h, a, 0.0, 0.0, S, u0);
        s.scaled_ = true;
        s.P_ = P;
        s.Q_ = P + a * h / (2.0 * s.omn2_);
        return s;
    }

    double velocity(double z) const {
        if (scaled_) return a_ * z * z / (2.0 * omn2_) + slope0_ * z + 2.0 * n2_ * scaled_integral(z) + u0_;
        const double kz = k_ * z;
        return a_ * z * z / (2.0 * omn2_) +
               2.0 * n2_ / k_ * (A_ * hyp::sinhmx(kz) + B_ * hyp::coshm1(kz)) + slope0_ * z + u0_;
    }

    double velocity_derivative(double z) const {
        if (scaled_) return a_ * z / omn2_ + slope0_ + 2.0 * n2_ * scaled_homogeneous(z);
        const double kz = k_ * z;
        return a_ * z / omn2_ + 2.0 * n2_ * (A_ * hyp::coshm1(kz) + B_ * std::sinh(kz)) + slope0_;
    }

    double microrotation(double z) const {
        if (scaled_) return P_ + a_ * z / (2.0 * omn2_) + scaled_homogeneous(z);
        const double kz = k_ * z;
        return A_ * hyp::coshm1(kz) + B_ * std::sinh(kz) + a_ * z / (2.0 * omn2_);
    }

    /// Integral of the velocity over [0, h].
    double depth_integral() const {
        const double kh = k_ * h_;
        if (scaled_) {
            // int_0^h int_0^z W_h = h^2 (P c(kh) - Q sinhmx(kh) / ((kh)^2 sinh kh))
            const double c = hyp::one_minus_ycothy_over_y2(kh);
            const double s = hyp::sinhmx(kh) / std::sinh(kh) / (kh * kh);
            return a_ * h_ * h_ * h_ / (6.0 * omn2_) + 0.5 * slope0_ * h_ * h_ +
                   2.0 * n2_ * h_ * h_ * (P_ * c - Q_ * s) + u0_ * h_;
        }
        return a_ * h_ * h_ * h_ / (6.0 * omn2_) +
               2.0 * n2_ / (k_ * k_) * (A_ * hyp::coshm1mx2(kh) + B_ * hyp::sinhmx(kh)) +
               0.5 * slope0_ * h_ * h_ + u0_ * h_;
    }

    bool is_scaled() const { return scaled_; }

private:
    // W_h(z) = -(P sinh k(h - z) + Q sinh kz) / sinh kh
    double scaled_homogeneous(double z) const {
        const double kh = k_ * h_;
        const double d = std::expm1(-2.0 * kh);
        const double r0 = std::exp(-k_ * z) * (std::expm1(-2.0 * k_ * (h_ - z)) / d);
        const double rh = std::exp(-k_ * (h_ - z)) * (std::expm1(-2.0 * k_ * z) / d);
        return -(P_ * r0 + Q_ * rh);
    }

    // int_0^z W_h
    double scaled_integral(double z) const {
        const double kh = k_ * h_;
        const double d = -std::expm1(-2.0 * kh);
        const double e = std::expm1(-k_ * z);
        const double t0 = std::expm1(-k_ * (2.0 * h_ - z)) * e / d;
        const double th = std::exp(k_ * (z - h_)) * e * e / d;
        return -(P_ * t0 + Q_ * th) / k_;
    }

    double k_, n2_, omn2_, h_;
    double a_, A_, B_, slope0_, u0_;
    bool scaled_ = false;
    double P_ = 0, Q_ = 0;
};

/// k h above which profiles use the scaled form.
inline constexpr double kScaledFormKh = 4.0;

namespace detail {

/// Scaled-form solution for any regime; valid for all k h.
inline TransverseSolution transverse_solution_scaled(const SlipRegime& regime, double h, const FluidParams& p,
                                                     double a, double b) {
    const double omn2 = p.one_minus_N2();
    const double n2 = p.N2();
    const double tk = std::tanh(0.5 * p.k() * h) / p.k();
    // u(0) from u(h) = 0; u'(0) = 2 (1 - N^2) P - b / (2 N^2) since W(0) = 0
    const auto u0_of = [&](double P) {
        const double S = 2.0 * P - b / (2.0 * n2);
        return -a * h * h / (2.0 * omn2) - S * h + 2.0 * n2 * tk * (2.0 * P + a * h / (2.0 * omn2));
    };
    const double R = -a * h * h / (2.0 * omn2) + b * h / (2.0 * n2) + n2 * tk * a * h / omn2;
    const double D = 2.0 * h - 4.0 * n2 * tk;
    return std::visit(
        [&](const auto& r) -> TransverseSolution {
            using Rg = std::decay_t<decltype(r)>;
            double P = 0.0, u0 = 0.0;
            if constexpr (std::is_same_v<Rg, PerfectSlip>) {
                P = b / (4.0 * n2 * omn2);
                u0 = u0_of(P);
            } else if constexpr (std::is_same_v<Rg, NoSlip>) {
                P = R / D;
            } else {
                const double lambda = r.lambda();
                P = (b / (2.0 * n2) + lambda * R) / (2.0 * omn2 + lambda * D);
                u0 = u0_of(P);
            }
            return TransverseSolution::scaled(p, h, a, P, 2.0 * P - b / (2.0 * n2), u0);
        },
        regime);
}

} // namespace detail

/// Solution for the scalar loads (a, b) of one planar component.
inline TransverseSolution transverse_solution(const SlipRegime& regime, double h, const FluidParams& p,
                                              double a, double b) {
    if (detail::checked_kh(h, p) > kScaledFormKh) return detail::transverse_solution_scaled(regime, h, p, a, b);
    const double omn2 = p.one_minus_N2();
    const double n2 = p.N2();
    const double fa = -a * h / (2.0 * omn2);
    return std::visit(
        [&](const auto& r) -> TransverseSolution {
            using R = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<R, PerfectSlip>) {
                const auto c = coeffs_perfect(h, p);
                const double fb = -b / (2.0 * omn2);
                const double A = -b / (4.0 * n2 * omn2);
                const double B = fa * c.B1 + fb * c.B2;
                const double D = fa * c.D1 + fb * c.D2;
                return {p, h, a, A, B, 0.0, D + 2.0 * n2 / p.k() * B};
            } else if constexpr (std::is_same_v<R, NoSlip>) {
                const auto c = coeffs_noslip(h, p);
                const double fb = b / (2.0 * n2) * h;
                const double A = fa * c.A1 + fb * c.A2;
                const double B = fa * c.B1 + fb * c.B2;
                return {p, h, a, A, B, -2.0 * omn2 * A - b / (2.0 * n2), 0.0};
            } else {
                const double lambda = r.lambda();
                const auto c = coeffs_partial(h, p, lambda);
                const double fb = b / (2.0 * n2) * (h + 1.0 / lambda);
                const double A = fa * c.A1 + fb * c.A2;
                const double B = fa * c.B1 + fb * c.B2;
                const double slope0 = -2.0 * omn2 * A - b / (2.0 * n2);
                return {p, h, a, A, B, slope0, slope0 / lambda};
            }
        },
        regime);
}

// ---------------------------------------------------------------------------
// Vector profiles
// ---------------------------------------------------------------------------

/// Both planar components for F = grad p - f' and microrotation source g.
struct TransversePair {
    TransverseSolution first;  // (u1, w2)
    TransverseSolution second; // (u2, -w1)
};

inline TransversePair transverse_pair(const SlipRegime& regime, double h, const FluidParams& p, Vec2 F,
                                      Vec2 g) {
    return {transverse_solution(regime, h, p, F.x, g.y), transverse_solution(regime, h, p, F.y, -g.x)};
}

namespace detail {
inline void check_depth(double z3, double h) {
    if (!(z3 >= 0.0 && z3 <= h)) {
        std::ostringstream os;
        os.precision(17);
        os << "z3 = " << z3 << " outside [0, " << h << "]";
        throw DomainError(os.str());
    }
}
} // namespace detail

/// Planar velocity u'(z3). The vertical component vanishes identically.
inline Vec2 velocity_profile(const SlipRegime& regime, double h, const FluidParams& p, Vec2 F, Vec2 g,
                             double z3) {
    detail::check_depth(z3, h);
    const auto s = transverse_pair(regime, h, p, F, g);
    return {s.first.velocity(z3), s.second.velocity(z3)};
}

/// Planar microrotation w'(z3). The vertical component vanishes identically.
inline Vec2 microrotation_profile(const SlipRegime& regime, double h, const FluidParams& p, Vec2 F, Vec2 g,
                                  double z3) {
    detail::check_depth(z3, h);
    const auto s = transverse_pair(regime, h, p, F, g);
    return {-s.second.microrotation(z3), s.first.microrotation(z3)};
}

/// Depth integral of u' over [0, h] from the analytic antiderivative.
inline Vec2 average_velocity(const SlipRegime& regime, double h, const FluidParams& p, Vec2 F, Vec2 g) {
    const auto s = transverse_pair(regime, h, p, F, g);
    return {s.first.depth_integral(), s.second.depth_integral()};
}

// ---------------------------------------------------------------------------
// Mobilities
// ---------------------------------------------------------------------------

/// No-slip mobility factor Phi(h, N, Rc); tends to 1/12 as N -> 0.
inline double mobility_phi(double h, const FluidParams& p) {
    const double kh = detail::checked_kh(h, p);
    return 1.0 / 12.0 + 0.25 * p.N2() * hyp::one_minus_ycothy_over_y2(0.5 * kh);
}

namespace printed {

/// Phi exactly as printed (in terms of N and Rc rather than k).
inline double phi(double h, const FluidParams& p) {
    const double n2 = p.N2(), rc = p.Rc(), omn2 = p.one_minus_N2();
    return 1.0 / 12.0 + rc / (4.0 * h * h * omn2) -
           1.0 / (4.0 * h) * std::sqrt(n2 * rc / omn2) * hyp::coth(p.N() * h * std::sqrt(omn2 / rc));
}

/// The no-slip microrotation-source factor Psi, printed as identically zero.
inline double psi(double h, const FluidParams& p) {
    const double k = p.k(), n2 = p.N2(), kh = k * h;
    const double t = std::tanh(0.5 * kh);
    const double den = 2.0 * n2 / k * t - h;
    return h * h / 2.0 - h / 2.0 * (2.0 * n2 / (k * k) * hyp::coshm1(kh) - h * h) / den +
           n2 / k * h * (std::sinh(kh) / k - h) * t / den;
}

struct PartialThetas {
    double theta1 = 0, theta2 = 0, theta3 = 0, theta4 = 0, theta5 = 0;
};

/// Partial-slip mobility functions built from the printed coefficients.
inline PartialThetas partial_thetas(double h, const FluidParams& p, double lambda) {
    const auto c = partial_coefficients(h, p, lambda);
    const double k = p.k(), n2 = p.N2(), kh = k * h;
    const double ch1 = hyp::coshm1(kh), sh = std::sinh(kh);
    PartialThetas t;
    t.theta1 = 1.0 / 6.0 + 0.5 * c.A1 + n2 / kh * c.B1 - n2 / (kh * kh) * (ch1 * c.A1 + sh * c.B1);
    t.theta2 = h / 2.0 - (2.0 * n2 / k * ch1 - h * h) * c.A2 - 2.0 * n2 / k * (sh / k - h) * c.B2;
    t.theta3 = c.A1;
    t.theta4 = 1.0 - (-2.0 * h * p.one_minus_N2() + 2.0 * n2 / (k * k) * ch1 - h * h) * c.A2 -
               2.0 * n2 / k * (sh / k - h) * c.B2;
    t.theta5 = c.A2;
    return t;
}

struct PerfectThetas {
    double theta1 = 0, theta2 = 0;
};

inline PerfectThetas perfect_thetas(double h, const FluidParams& p) {
    const double k = p.k(), n2 = p.N2(), kh = detail::checked_kh(h, p);
    const double sh = std::sinh(kh), ch = std::cosh(kh);
    return {1.0 + 3.0 * n2 / (k * h * h) * (1.0 / k - hyp::coth(kh)),
            1.0 - 2.0 / (k * h * h) * sh * (-1.0 - 1.0 / k / (ch * sh) + ch * hyp::coth(0.5 * kh))};
}

} // namespace printed

/// Mobility coefficients from the printed formulas, with the combined scalar
/// mobilities M (flux per unit -(grad p - f')) and G (flux per unit (g')^perp)
/// in the positive-mobility convention.
struct PrintedMobility {
    SlipRegime regime;
    /// Partial: theta1..theta5. NoSlip: {Phi, Psi}. Perfect: {theta1^0, theta2^0}.
    std::array<double, 5> values{};
    double M = 0;
    double G = 0;
};

inline PrintedMobility mobility_coeffs_printed(const SlipRegime& regime, double h, const FluidParams& p) {
    const double omn2 = p.one_minus_N2(), n2 = p.N2();
    return std::visit(
        [&](const auto& r) -> PrintedMobility {
            using R = std::decay_t<decltype(r)>;
            PrintedMobility m{regime, {}, 0, 0};
            if constexpr (std::is_same_v<R, NoSlip>) {
                const double phi = mobility_phi(h, p);
                const double psi = printed::psi(h, p);
                m.values = {phi, psi, 0, 0, 0};
                m.M = h * h * h * phi / omn2;
                m.G = psi / n2;
            } else if constexpr (std::is_same_v<R, PerfectSlip>) {
                const auto t = printed::perfect_thetas(h, p);
                m.values = {t.theta1, t.theta2, 0, 0, 0};
                m.M = h * h * h * t.theta1 / (3.0 * omn2);
                m.G = h * h * t.theta2 / (4.0 * omn2);
            } else {
                const double lambda = r.lambda();
                const auto t = printed::partial_thetas(h, p, lambda);
                m.values = {t.theta1, t.theta2, t.theta3, t.theta4, t.theta5};
                m.M = -(h * h * h * t.theta1 / omn2 - h * h * t.theta3 / lambda);
                m.G = h * t.theta2 / (2.0 * n2) - t.theta4 / (2.0 * n2 * lambda) +
                      h * omn2 * t.theta5 / (n2 * lambda * lambda);
            }
            return m;
        },
        regime);
}

/// Affine depth-averaged response U' = -M (grad p - f') + G (g')^perp at one x'.
struct MobilityResponse {
    double M = 0;
    double G = 0;
};

/// Extracts (M, G) from unit-load evaluations of average_velocity and checks
/// that both planar directions give the same response.
inline MobilityResponse probe_mobility(const SlipRegime& regime, double h, const FluidParams& p) {
    const Vec2 m1 = average_velocity(regime, h, p, {1.0, 0.0}, {});
    const Vec2 m2 = average_velocity(regime, h, p, {0.0, 1.0}, {});
    // g chosen so that perp(g) is the unit vector e1, then e2
    const Vec2 g1 = average_velocity(regime, h, p, {}, {0.0, -1.0});
    const Vec2 g2 = average_velocity(regime, h, p, {}, {1.0, 0.0});
    const MobilityResponse r{-m1.x, g1.x};
    const auto differs = [](double a, double b) {
        return std::abs(a - b) > 1e-12 * std::max({std::abs(a), std::abs(b), 1.0});
    };
    if (differs(r.M, -m2.y) || differs(r.G, g2.y) || differs(m1.y, 0.0) || differs(m2.x, 0.0) ||
        differs(g1.y, 0.0) || differs(g2.x, 0.0)) {
        std::ostringstream os;
        os.precision(17);
        os << "planar directions disagree: M = (" << r.M << ", " << -m2.y << "), G = (" << r.G << ", "
           << g2.y << ")";
        throw AnisotropyDetected(os.str());
    }
    return r;
}

} // namespace micro_reynolds

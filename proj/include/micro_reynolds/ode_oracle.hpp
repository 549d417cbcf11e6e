#pragma once

// Finite-difference solution of the reduced transverse system. This is the
// reference the closed forms are checked against, so it deliberately uses
// nothing from closed_form.hpp: the four component equations
//
//   -u1'' + 2 N^2 w2' = -F1          -Rc w1'' + 4 N^2 w1 + 2 N^2 u2' = g1
//   -u2'' - 2 N^2 w1' = -F2          -Rc w2'' + 4 N^2 w2 - 2 N^2 u1' = g2
//
// (F = grad p - f') are discretized directly with second-order central
// differences and solved as one banded system with the unknowns interleaved
// per node.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <tuple>
#include <variant>
#include <vector>

#include "banded.hpp"
#include "core_model.hpp"
#include "errors.hpp"

namespace micro_reynolds {

/// Uniform nodes z_j = j h / (n + 1), j = 0..n+1.
class TransverseGrid {
public:
    TransverseGrid(double h, std::size_t interior) : h_(h), n_(interior) {
        if (!(h > 0.0)) throw DomainError("transverse grid needs h > 0");
        if (interior < 9) throw DomainError("transverse grid needs at least 9 interior points");
    }

    std::size_t interior() const noexcept { return n_; }
    std::size_t nodes() const noexcept { return n_ + 2; }
    double height() const noexcept { return h_; }
    double spacing() const noexcept { return h_ / static_cast<double>(n_ + 1); }
    double z(std::size_t j) const {
        return j == n_ + 1 ? h_ : static_cast<double>(j) * spacing();
    }

private:
    double h_;
    std::size_t n_;
};

/// Samples of (u1, u2, w1, w2) on a transverse grid.
struct TransverseProfile {
    TransverseGrid grid;
    SlipRegime regime;
    FluidParams params;
    Vec2 F;
    Vec2 g;
    std::vector<double> u1, u2, w1, w2;
    /// discrete energy identity gap, |a_h(U,U) - l_h(U)| / max(|a_h|, |l_h|)
    double energy_gap = 0.0;

    /// Second-order one-sided derivative of a field at z = 0.
    static double bottom_slope(const std::vector<double>& f, double dz) {
        return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dz);
    }

    /// u'(0) - lambda u(0) for both velocity components (lambda = 0 for perfect
    /// slip). For no-slip this returns u(0).
    Vec2 bottom_condition_residual() const {
        const double dz = grid.spacing();
        if (std::holds_alternative<NoSlip>(regime)) return {u1[0], u2[0]};
        const double lambda =
            std::holds_alternative<PartialSlip>(regime) ? std::get<PartialSlip>(regime).lambda() : 0.0;
        return {bottom_slope(u1, dz) - lambda * u1[0], bottom_slope(u2, dz) - lambda * u2[0]};
    }
};

namespace oracle_detail {

enum Field : std::size_t { kU1 = 0, kU2 = 1, kW1 = 2, kW2 = 3 };

inline std::size_t idx(std::size_t node, Field f) { return 4 * node + f; }

struct DiscreteSystem {
    BandMatrix K;
    std::vector<double> rhs;
    /// quadrature-like row weights for the energy identity (0 on Dirichlet rows)
    std::vector<double> weight;
};

inline DiscreteSystem build(const SlipRegime& regime, const TransverseGrid& grid, const FluidParams& p,
                            Vec2 F, Vec2 g) {
    const std::size_t nodes = grid.nodes();
    const std::size_t last = nodes - 1;
    const double dz = grid.spacing();
    const double inv2 = 1.0 / (dz * dz);
    const double c = 2.0 * p.N2() / (2.0 * dz); // 2 N^2 times the central-difference factor
    const double rc = p.Rc();
    const double four_n2 = 4.0 * p.N2();

    DiscreteSystem s{BandMatrix(4 * nodes, 7, 11), std::vector<double>(4 * nodes, 0.0),
                     std::vector<double>(4 * nodes, dz)};
    auto& K = s.K;

    const auto dirichlet = [&](std::size_t node, Field f) {
        const std::size_t r = idx(node, f);
        K(r, r) = 1.0;
        s.rhs[r] = 0.0;
        s.weight[r] = 0.0;
    };

    for (std::size_t j = 1; j < last; ++j) {
        // velocity rows: -u'' -/+ 2 N^2 w' = -F
        for (const auto& [uf, wf, sign, load] :
             {std::tuple{kU1, kW2, 1.0, -F.x}, std::tuple{kU2, kW1, -1.0, -F.y}}) {
            const std::size_t r = idx(j, uf);
            K(r, idx(j - 1, uf)) = -inv2;
            K(r, idx(j, uf)) = 2.0 * inv2;
            K(r, idx(j + 1, uf)) = -inv2;
            K(r, idx(j + 1, wf)) = sign * c;
            K(r, idx(j - 1, wf)) = -sign * c;
            s.rhs[r] = load;
        }
        // microrotation rows: -Rc w'' + 4 N^2 w +/- 2 N^2 u' = g
        for (const auto& [wf, uf, sign, load] :
             {std::tuple{kW1, kU2, 1.0, g.x}, std::tuple{kW2, kU1, -1.0, g.y}}) {
            const std::size_t r = idx(j, wf);
            K(r, idx(j - 1, wf)) = -rc * inv2;
            K(r, idx(j, wf)) = 2.0 * rc * inv2 + four_n2;
            K(r, idx(j + 1, wf)) = -rc * inv2;
            K(r, idx(j + 1, uf)) = sign * c;
            K(r, idx(j - 1, uf)) = -sign * c;
            s.rhs[r] = load;
        }
    }

    for (Field f : {kU1, kU2, kW1, kW2}) dirichlet(last, f);
    dirichlet(0, kW1);
    dirichlet(0, kW2);

    if (std::holds_alternative<NoSlip>(regime)) {
        dirichlet(0, kU1);
        dirichlet(0, kU2);
    } else {
        // Ghost node u_{-1} = u_1 - 2 dz lambda u_0 eliminated from the
        // velocity equation at z = 0; w'(0) from the one-sided stencil.
        const double lambda =
            std::holds_alternative<PartialSlip>(regime) ? std::get<PartialSlip>(regime).lambda() : 0.0;
        const double one_sided = 2.0 * p.N2() / (2.0 * dz);
        for (const auto& [uf, wf, sign, load] :
             {std::tuple{kU1, kW2, 1.0, -F.x}, std::tuple{kU2, kW1, -1.0, -F.y}}) {
            const std::size_t r = idx(0, uf);
            K(r, idx(0, uf)) = 2.0 * inv2 * (1.0 + dz * lambda);
            K(r, idx(1, uf)) = -2.0 * inv2;
            K(r, idx(0, wf)) = sign * one_sided * -3.0;
            K(r, idx(1, wf)) = sign * one_sided * 4.0;
            K(r, idx(2, wf)) = sign * one_sided * -1.0;
            s.rhs[r] = load;
            s.weight[r] = 0.5 * dz;
        }
    }
    return s;
}

} // namespace oracle_detail

/// Solves the reduced transverse boundary-value problem on n interior points.
inline TransverseProfile solve_reduced_bvp(const SlipRegime& regime, double h, const FluidParams& params,
                                           Vec2 F, Vec2 g, std::size_t n) {
    using namespace oracle_detail;
    const TransverseGrid grid(h, n);
    const auto sys = build(regime, grid, params, F, g);
    std::vector<double> x;
    try {
        x = sys.K.solve(sys.rhs);
    } catch (const SingularDiscreteSystem& e) {
        std::ostringstream os;
        os << e.what() << " (regime " << regime_name(regime) << ", h = " << h << ", N = " << params.N()
           << ", Rc = " << params.Rc() << ", n = " << n << ")";
        throw SingularDiscreteSystem(os.str());
    }
    for (double v : x) {
        if (!std::isfinite(v)) throw SingularDiscreteSystem("non-finite transverse solution");
    }

    // a_h(U, U) - l_h(U) = sum_r weight_r U_r (K U - rhs)_r
    const auto res = sys.K.residual(x, sys.rhs);
    long double gap = 0.0L, load = 0.0L;
    for (std::size_t r = 0; r < x.size(); ++r) {
        gap += sys.weight[r] * x[r] * res[r];
        load += sys.weight[r] * x[r] * sys.rhs[r];
    }
    const double form = static_cast<double>(load + gap);
    const double scale = std::max({std::abs(form), std::abs(static_cast<double>(load)), 1e-300});

    TransverseProfile prof{grid, regime, params, F, g, {}, {}, {}, {}, static_cast<double>(std::abs(gap)) / scale};
    const std::size_t nodes = grid.nodes();
    prof.u1.resize(nodes);
    prof.u2.resize(nodes);
    prof.w1.resize(nodes);
    prof.w2.resize(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
        prof.u1[j] = x[idx(j, kU1)];
        prof.u2[j] = x[idx(j, kU2)];
        prof.w1[j] = x[idx(j, kW1)];
        prof.w2[j] = x[idx(j, kW2)];
    }
    return prof;
}

/// Richardson extrapolation (4 fine - coarse) / 3 onto the n-point grid, using
/// the nested grid with 2n + 1 interior points.
inline TransverseProfile solve_reduced_bvp_richardson(const SlipRegime& regime, double h,
                                                      const FluidParams& params, Vec2 F, Vec2 g,
                                                      std::size_t n) {
    auto coarse = solve_reduced_bvp(regime, h, params, F, g, n);
    const auto fine = solve_reduced_bvp(regime, h, params, F, g, 2 * n + 1);
    const auto extrapolate = [](std::vector<double>& c, const std::vector<double>& f) {
        for (std::size_t j = 0; j < c.size(); ++j) c[j] = (4.0 * f[2 * j] - c[j]) / 3.0;
    };
    extrapolate(coarse.u1, fine.u1);
    extrapolate(coarse.u2, fine.u2);
    extrapolate(coarse.w1, fine.w1);
    extrapolate(coarse.w2, fine.w2);
    coarse.energy_gap = std::max(coarse.energy_gap, fine.energy_gap);
    return coarse;
}

/// Composite Simpson weights on m intervals of width dz; an odd count closes
/// with the 3/8 rule on the last three intervals.
inline std::vector<double> simpson_weights(std::size_t intervals, double dz) {
    if (intervals < 3) throw DomainError("Simpson quadrature needs at least 3 intervals");
    std::vector<double> w(intervals + 1, 0.0);
    const std::size_t simpson_end = intervals % 2 == 0 ? intervals : intervals - 3;
    for (std::size_t i = 0; i + 2 <= simpson_end; i += 2) {
        w[i] += dz / 3.0;
        w[i + 1] += 4.0 * dz / 3.0;
        w[i + 2] += dz / 3.0;
    }
    if (simpson_end != intervals) {
        const std::size_t i = simpson_end;
        w[i] += 3.0 * dz / 8.0;
        w[i + 1] += 9.0 * dz / 8.0;
        w[i + 2] += 9.0 * dz / 8.0;
        w[i + 3] += 3.0 * dz / 8.0;
    }
    return w;
}

/// Depth integral of (u1, u2) over [0, h].
inline Vec2 oracle_average_velocity(const TransverseProfile& profile) {
    const auto w = simpson_weights(profile.grid.nodes() - 1, profile.grid.spacing());
    Vec2 sum;
    for (std::size_t j = 0; j < w.size(); ++j) {
        sum.x += w[j] * profile.u1[j];
        sum.y += w[j] * profile.u2[j];
    }
    return sum;
}

namespace oracle_detail {

/// Linear interpolation of a sampled field at depth z.
inline double sample(const TransverseGrid& grid, const std::vector<double>& f, double z) {
    const double s = std::clamp(z / grid.spacing(), 0.0, static_cast<double>(grid.nodes() - 1));
    const auto j = std::min(static_cast<std::size_t>(s), grid.nodes() - 2);
    const double t = s - static_cast<double>(j);
    return (1.0 - t) * f[j] + t * f[j + 1];
}

/// Sup over all four fields of |coarse - fine| at the coarse nodes.
inline double sup_difference(const TransverseProfile& coarse, const TransverseProfile& fine) {
    double e = 0.0;
    for (std::size_t j = 0; j < coarse.grid.nodes(); ++j) {
        const double z = coarse.grid.z(j);
        e = std::max({e, std::abs(coarse.u1[j] - sample(fine.grid, fine.u1, z)),
                      std::abs(coarse.u2[j] - sample(fine.grid, fine.u2, z)),
                      std::abs(coarse.w1[j] - sample(fine.grid, fine.w1, z)),
                      std::abs(coarse.w2[j] - sample(fine.grid, fine.w2, z))});
    }
    return e;
}

} // namespace oracle_detail

/// Observed order of accuracy from sup-norm differences of successive solves.
/// Grids should be nested (n_{i+1} + 1 a multiple of n_i + 1) for exact
/// node matching; otherwise the finer solution is linearly interpolated.
/// Returns the estimate from the finest pair.
inline double convergence_order(const SlipRegime& regime, double h, const FluidParams& params, Vec2 F,
                                Vec2 g, const std::vector<std::size_t>& n_sequence) {
    if (n_sequence.size() < 3) throw DomainError("convergence_order needs at least 3 grid sizes");
    for (std::size_t i = 1; i < n_sequence.size(); ++i) {
        if (n_sequence[i] <= n_sequence[i - 1]) throw DomainError("grid sizes must be strictly increasing");
    }
    std::vector<TransverseProfile> sols;
    sols.reserve(n_sequence.size());
    for (std::size_t n : n_sequence) sols.push_back(solve_reduced_bvp(regime, h, params, F, g, n));

    std::vector<double> diffs;
    for (std::size_t i = 0; i + 1 < sols.size(); ++i) {
        diffs.push_back(oracle_detail::sup_difference(sols[i], sols[i + 1]));
    }
    double order = 0.0;
    for (std::size_t i = 0; i + 1 < diffs.size(); ++i) {
        if (!(diffs[i + 1] < diffs[i])) {
            std::ostringstream os;
            os << "successive differences did not decrease: " << diffs[i] << " -> " << diffs[i + 1];
            throw NonMonotoneConvergence(os.str());
        }
        const double ratio = sols[i].grid.spacing() / sols[i + 1].grid.spacing();
        order = std::log(diffs[i] / diffs[i + 1]) / std::log(ratio);
    }
    return order;
}

} // namespace micro_reynolds

#pragma once

// Generalized Reynolds equation on a rectangle,
//
//   find p with  int M grad p . grad theta = int S . grad theta   for all theta,
//                int h p = 0,
//
// discretized with bilinear elements on a structured mesh. The flux
// U' = -M grad p + S has zero normal component on the boundary as the natural
// condition of the weak form.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <unordered_map>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "closed_form.hpp"
#include "core_model.hpp"
#include "errors.hpp"
#include "parallel.hpp"

namespace micro_reynolds {

/// Structured grid of nx x ny axis-aligned cells; nodes are numbered
/// j (nx + 1) + i.
class Mesh2D {
public:
    Mesh2D(Rectangle domain, std::size_t nx, std::size_t ny) : domain_(domain), nx_(nx), ny_(ny) {
        if (nx < 4 || ny < 4) throw DomainError("mesh needs at least 4 cells per direction");
        if (!(domain.lx > 0.0 && domain.ly > 0.0)) throw DomainError("mesh domain must have positive area");
    }

    const Rectangle& domain() const noexcept { return domain_; }
    std::size_t nx() const noexcept { return nx_; }
    std::size_t ny() const noexcept { return ny_; }
    std::size_t node_count() const noexcept { return (nx_ + 1) * (ny_ + 1); }
    std::size_t cell_count() const noexcept { return nx_ * ny_; }
    double dx() const noexcept { return domain_.lx / static_cast<double>(nx_); }
    double dy() const noexcept { return domain_.ly / static_cast<double>(ny_); }

    std::size_t node_index(std::size_t i, std::size_t j) const noexcept { return j * (nx_ + 1) + i; }

    Vec2 node(std::size_t i, std::size_t j) const {
        return {i == nx_ ? domain_.lx : static_cast<double>(i) * dx(),
                j == ny_ ? domain_.ly : static_cast<double>(j) * dy()};
    }
    Vec2 node(std::size_t n) const { return node(n % (nx_ + 1), n / (nx_ + 1)); }

    bool on_boundary(std::size_t n) const {
        const std::size_t i = n % (nx_ + 1), j = n / (nx_ + 1);
        return i == 0 || j == 0 || i == nx_ || j == ny_;
    }

    /// Counter-clockwise nodes of cell (ci, cj): (0,0), (1,0), (1,1), (0,1).
    std::array<std::size_t, 4> cell_nodes(std::size_t ci, std::size_t cj) const {
        return {node_index(ci, cj), node_index(ci + 1, cj), node_index(ci + 1, cj + 1),
                node_index(ci, cj + 1)};
    }

    std::vector<Vec2> nodes() const {
        std::vector<Vec2> out(node_count());
        for (std::size_t n = 0; n < out.size(); ++n) out[n] = node(n);
        return out;
    }

private:
    Rectangle domain_;
    std::size_t nx_, ny_;
};

/// Tensor-product Gauss rule on the reference square [-1, 1]^2.
struct GaussRule {
    std::vector<double> xi, eta, weight;

    static GaussRule tensor(int points) {
        std::vector<double> x, w;
        if (points == 2) {
            const double a = 1.0 / std::sqrt(3.0);
            x = {-a, a};
            w = {1.0, 1.0};
        } else if (points == 3) {
            const double a = std::sqrt(0.6);
            x = {-a, 0.0, a};
            w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
        } else {
            throw DomainError("Gauss rule supports 2 or 3 points per direction");
        }
        GaussRule r;
        for (std::size_t j = 0; j < x.size(); ++j) {
            for (std::size_t i = 0; i < x.size(); ++i) {
                r.xi.push_back(x[i]);
                r.eta.push_back(x[j]);
                r.weight.push_back(w[i] * w[j]);
            }
        }
        return r;
    }
    std::size_t size() const { return weight.size(); }
};

namespace fem {

/// Bilinear shape functions and reference gradients at (xi, eta).
inline std::array<double, 4> shape(double xi, double eta) {
    return {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta), 0.25 * (1 + xi) * (1 + eta),
            0.25 * (1 - xi) * (1 + eta)};
}

/// Physical gradients on a dx x dy cell.
inline std::array<Vec2, 4> shape_gradients(double xi, double eta, double dx, double dy) {
    const double sx = 2.0 / dx, sy = 2.0 / dy;
    return {Vec2{-0.25 * (1 - eta) * sx, -0.25 * (1 - xi) * sy}, Vec2{0.25 * (1 - eta) * sx, -0.25 * (1 + xi) * sy},
            Vec2{0.25 * (1 + eta) * sx, 0.25 * (1 + xi) * sy}, Vec2{-0.25 * (1 + eta) * sx, 0.25 * (1 - xi) * sy}};
}

inline Vec2 physical_point(const Mesh2D& mesh, std::size_t ci, std::size_t cj, double xi, double eta) {
    const Vec2 o = mesh.node(ci, cj);
    return {o.x + 0.5 * (1 + xi) * mesh.dx(), o.y + 0.5 * (1 + eta) * mesh.dy()};
}

} // namespace fem

enum class CoefficientSource { Probe, Printed };

/// Mobility M and source S = M f' + G (g')^perp sampled at mesh nodes and at
/// the 2x2 Gauss points of every cell (cell-major, 4 points per cell).
struct MobilityField {
    SlipRegime regime;
    CoefficientSource source = CoefficientSource::Probe;
    std::vector<double> node_h, node_M, node_G;
    std::vector<Vec2> node_S;
    std::vector<double> quad_h, quad_M, quad_G;
    std::vector<Vec2> quad_S;
};

/// (M, G) at one height for the chosen coefficient route.
inline MobilityResponse mobility_at(const SlipRegime& regime, double h, const FluidParams& params,
                                    CoefficientSource source) {
    if (source == CoefficientSource::Probe) return probe_mobility(regime, h, params);
    if (std::holds_alternative<NoSlip>(regime)) {
        // Psi vanishes identically, so g drops out of the no-slip equation
        return {mobility_coeffs_printed(regime, h, params).M, 0.0};
    }
    if (std::holds_alternative<PerfectSlip>(regime)) {
        return {mobility_coeffs_printed(regime, h, params).M, probe_mobility(regime, h, params).G};
    }
    const auto m = mobility_coeffs_printed(regime, h, params);
    return {m.M, m.G};
}

inline MobilityField build_mobility_field(const FilmGeometry& geometry, const FluidParams& params,
                                          const SlipRegime& regime, const BodyForces& forces,
                                          CoefficientSource source, const Mesh2D& mesh) {
    std::vector<Vec2> nodes = mesh.nodes();
    const GaussRule rule = GaussRule::tensor(2);
    std::vector<Vec2> quad;
    quad.reserve(mesh.cell_count() * 4);
    for (std::size_t cj = 0; cj < mesh.ny(); ++cj) {
        for (std::size_t ci = 0; ci < mesh.nx(); ++ci) {
            for (std::size_t q = 0; q < rule.size(); ++q) {
                quad.push_back(fem::physical_point(mesh, ci, cj, rule.xi[q], rule.eta[q]));
            }
        }
    }

    MobilityField field{regime, source, {}, {}, {}, {}, {}, {}, {}, {}};
    const auto evaluate = [&](const std::vector<Vec2>& pts, std::vector<double>& hs, std::vector<double>& Ms,
                              std::vector<double>& Gs, std::vector<Vec2>& Ss) {
        hs.resize(pts.size());
        Ms.resize(pts.size());
        Gs.resize(pts.size());
        Ss.resize(pts.size());
        parallel_chunks(pts.size(), [&](std::size_t begin, std::size_t end) {
            // memoized by the bit pattern of h; structured geometries repeat heights
            std::unordered_map<std::uint64_t, MobilityResponse> memo;
            for (std::size_t i = begin; i < end; ++i) {
                const Vec2 x = pts[i];
                const double h = geometry.height(x.x, x.y);
                const auto key = std::bit_cast<std::uint64_t>(h);
                auto it = memo.find(key);
                if (it == memo.end()) it = memo.emplace(key, mobility_at(regime, h, params, source)).first;
                const MobilityResponse r = it->second;
                if (!(r.M > 0.0) || !std::isfinite(r.M)) {
                    std::ostringstream os;
                    os.precision(17);
                    os << "mobility M = " << r.M << " at (" << x.x << ", " << x.y << ") with h = " << h
                       << ", N = " << params.N() << ", Rc = " << params.Rc() << ", regime "
                       << regime_name(regime);
                    if (const auto* ps = std::get_if<PartialSlip>(&regime)) os << " (lambda = " << ps->lambda() << ")";
                    throw NonPositiveMobility(os.str());
                }
                hs[i] = h;
                Ms[i] = r.M;
                Gs[i] = r.G;
                Ss[i] = r.M * forces.f(x.x, x.y) + r.G * perp(forces.g(x.x, x.y));
            }
        });
    };
    evaluate(nodes, field.node_h, field.node_M, field.node_G, field.node_S);
    evaluate(quad, field.quad_h, field.quad_M, field.quad_G, field.quad_S);
    return field;
}

/// K p = b subject to c . p = 0.
struct ReynoldsSystem {
    Eigen::SparseMatrix<double> K;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
};

/// Assembles stiffness, load and constraint vectors with 2x2 Gauss
/// quadrature. With weighted_mean the constraint is int h theta_i, otherwise
/// int theta_i.
inline ReynoldsSystem assemble(const Mesh2D& mesh, const MobilityField& mobility, bool weighted_mean = true) {
    const std::size_t quad_count = mesh.cell_count() * 4;
    if (mobility.quad_M.size() != quad_count || mobility.node_M.size() != mesh.node_count()) {
        throw DomainError("mobility field does not match the mesh");
    }
    const GaussRule rule = GaussRule::tensor(2);
    const double dx = mesh.dx(), dy = mesh.dy();
    const double jac = 0.25 * dx * dy;
    const std::size_t n = mesh.node_count();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.cell_count() * 16);
    ReynoldsSystem sys{Eigen::SparseMatrix<double>(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)),
                       Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)),
                       Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))};

    std::size_t cell = 0;
    for (std::size_t cj = 0; cj < mesh.ny(); ++cj) {
        for (std::size_t ci = 0; ci < mesh.nx(); ++ci, ++cell) {
            const auto conn = mesh.cell_nodes(ci, cj);
            std::array<std::array<double, 4>, 4> ke{};
            std::array<double, 4> be{}, ce{};
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const std::size_t qi = 4 * cell + q;
                const double w = rule.weight[q] * jac;
                const auto N = fem::shape(rule.xi[q], rule.eta[q]);
                const auto dN = fem::shape_gradients(rule.xi[q], rule.eta[q], dx, dy);
                const double M = mobility.quad_M[qi];
                const Vec2 S = mobility.quad_S[qi];
                const double hw = weighted_mean ? mobility.quad_h[qi] : 1.0;
                for (std::size_t a = 0; a < 4; ++a) {
                    for (std::size_t bb = 0; bb < 4; ++bb) ke[a][bb] += w * M * dot(dN[a], dN[bb]);
                    be[a] += w * dot(S, dN[a]);
                    ce[a] += w * hw * N[a];
                }
            }
            for (std::size_t a = 0; a < 4; ++a) {
                for (std::size_t bb = 0; bb < 4; ++bb) {
                    trip.emplace_back(static_cast<Eigen::Index>(conn[a]), static_cast<Eigen::Index>(conn[bb]),
                                      ke[a][bb]);
                }
                sys.b[static_cast<Eigen::Index>(conn[a])] += be[a];
                sys.c[static_cast<Eigen::Index>(conn[a])] += ce[a];
            }
        }
    }
    sys.K.setFromTriplets(trip.begin(), trip.end());
    sys.K.makeCompressed();
    return sys;
}

struct SolverOptions {
    /// relative residual bound for the constrained solve
    double tolerance = 1e-10;
    /// bound on |c . p| / (||c|| ||p||)
    double constraint_tolerance = 1e-10;
    /// iterative refinement sweeps after the direct solve
    int refinement_steps = 2;
};

/// Nodal pressure with the diagnostics of its solve.
struct PressureField {
    std::vector<double> p;
    /// ||K p + c mu - b|| / ||b|| (0 when b = 0)
    double relative_residual = 0.0;
    /// c . p, the weighted pressure mean
    double constraint_value = 0.0;
    double multiplier = 0.0;
};

inline double l2(const Eigen::VectorXd& v) { return v.norm(); }

/// Solves the bordered saddle system [K c; c^T 0] [p; mu] = [b; 0] with a
/// sparse LU factorization and iterative refinement.
inline PressureField solve_pressure(const ReynoldsSystem& sys, const SolverOptions& opts = {}) {
    const Eigen::Index n = sys.K.rows();
    PressureField out;
    out.p.assign(static_cast<std::size_t>(n), 0.0);
    const double bnorm = l2(sys.b);
    if (bnorm == 0.0) return out;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(sys.K.nonZeros() + 2 * n));
    for (Eigen::Index col = 0; col < sys.K.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.K, col); it; ++it) {
            trip.emplace_back(it.row(), it.col(), it.value());
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (sys.c[i] != 0.0) {
            trip.emplace_back(i, n, sys.c[i]);
            trip.emplace_back(n, i, sys.c[i]);
        }
    }
    Eigen::SparseMatrix<double> A(n + 1, n + 1);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) {
        throw SolverDivergence("sparse LU factorization of the Reynolds saddle system failed: " + lu.lastErrorMessage());
    }
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    rhs.head(n) = sys.b;
    Eigen::VectorXd x = lu.solve(rhs);
    for (int step = 0; step < opts.refinement_steps; ++step) {
        const Eigen::VectorXd r = rhs - A * x;
        x += lu.solve(r);
    }
    const Eigen::VectorXd r = rhs - A * x;
    out.relative_residual = l2(r.head(n)) / bnorm;
    for (Eigen::Index i = 0; i < n; ++i) out.p[static_cast<std::size_t>(i)] = x[i];
    out.multiplier = x[n];
    out.constraint_value = sys.c.dot(x.head(n));

    const double pnorm = l2(x.head(n));
    const double cnorm = l2(sys.c);
    const double constraint_rel = pnorm > 0.0 ? std::abs(out.constraint_value) / (cnorm * pnorm) : 0.0;
    if (!(out.relative_residual <= opts.tolerance) || !(constraint_rel <= opts.constraint_tolerance)) {
        std::ostringstream os;
        os << "Reynolds solve missed its tolerance: relative residual " << out.relative_residual << " (limit "
           << opts.tolerance << "), constraint " << constraint_rel << " (limit " << opts.constraint_tolerance
           << "), " << opts.refinement_steps << " refinement steps";
        throw SolverDivergence(os.str());
    }
    return out;
}

/// Depth-integrated flux diagnostics.
struct FluxField {
    /// U' = -M grad p + S at cell centers, cell-major
    std::vector<Vec2> cell_flux;
    /// sum over boundary nodes of int U' . grad theta_i, the discrete
    /// counterpart of the boundary flux integral
    double boundary_flux = 0.0;
    /// sum over boundary nodes of |int U' . grad theta_i|
    double boundary_flux_abs = 0.0;
    /// max over interior nodes of |int U' . grad theta_i| (discrete divergence)
    double divergence_residual = 0.0;
    /// L2 norm of U' over the domain (2x2 Gauss)
    double flux_norm = 0.0;
    /// L2 norm of the source flux S (2x2 Gauss)
    double source_norm = 0.0;

    /// |boundary flux| relative to the larger of the flux and source norms
    double relative_boundary_flux() const {
        const double scale = std::max(flux_norm, source_norm);
        return scale > 0.0 ? std::abs(boundary_flux) / scale : 0.0;
    }
};

inline FluxField flux_field(const Mesh2D& mesh, const PressureField& pressure, const MobilityField& mobility) {
    const GaussRule rule = GaussRule::tensor(2);
    const double dx = mesh.dx(), dy = mesh.dy(), jac = 0.25 * dx * dy;
    FluxField out;
    out.cell_flux.resize(mesh.cell_count());
    std::vector<double> nodal(mesh.node_count(), 0.0);
    double norm2 = 0.0, source2 = 0.0;
    std::size_t cell = 0;
    for (std::size_t cj = 0; cj < mesh.ny(); ++cj) {
        for (std::size_t ci = 0; ci < mesh.nx(); ++ci, ++cell) {
            const auto conn = mesh.cell_nodes(ci, cj);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const std::size_t qi = 4 * cell + q;
                const auto dN = fem::shape_gradients(rule.xi[q], rule.eta[q], dx, dy);
                Vec2 grad{};
                for (std::size_t a = 0; a < 4; ++a) grad = grad + pressure.p[conn[a]] * dN[a];
                const Vec2 U = -mobility.quad_M[qi] * grad + mobility.quad_S[qi];
                const double w = rule.weight[q] * jac;
                norm2 += w * dot(U, U);
                source2 += w * dot(mobility.quad_S[qi], mobility.quad_S[qi]);
                for (std::size_t a = 0; a < 4; ++a) nodal[conn[a]] += w * dot(U, dN[a]);
            }
            // grad p at the center of a bilinear cell
            const auto dNc = fem::shape_gradients(0.0, 0.0, dx, dy);
            Vec2 gc{};
            double Mc = 0.0;
            Vec2 Sc{};
            for (std::size_t a = 0; a < 4; ++a) {
                gc = gc + pressure.p[conn[a]] * dNc[a];
                Mc += 0.25 * mobility.quad_M[4 * cell + a];
                Sc = Sc + 0.25 * mobility.quad_S[4 * cell + a];
            }
            out.cell_flux[cell] = -Mc * gc + Sc;
        }
    }
    for (std::size_t n = 0; n < nodal.size(); ++n) {
        if (mesh.on_boundary(n)) {
            out.boundary_flux += nodal[n];
            out.boundary_flux_abs += std::abs(nodal[n]);
        } else {
            out.divergence_residual = std::max(out.divergence_residual, std::abs(nodal[n]));
        }
    }
    out.flux_norm = std::sqrt(norm2);
    out.source_norm = std::sqrt(source2);
    return out;
}

/// Integral of a planar function over the mesh with a 3x3 Gauss rule.
template <class Fn>
double integrate(const Mesh2D& mesh, Fn&& fn) {
    const GaussRule rule = GaussRule::tensor(3);
    const double jac = 0.25 * mesh.dx() * mesh.dy();
    double sum = 0.0;
    for (std::size_t cj = 0; cj < mesh.ny(); ++cj) {
        for (std::size_t ci = 0; ci < mesh.nx(); ++ci) {
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const Vec2 x = fem::physical_point(mesh, ci, cj, rule.xi[q], rule.eta[q]);
                sum += rule.weight[q] * jac * fn(x.x, x.y);
            }
        }
    }
    return sum;
}

/// || p_h - q ||_{L2} with the bilinear interpolant of the nodal pressure.
template <class Fn>
double l2_error(const Mesh2D& mesh, const PressureField& pressure, Fn&& exact) {
    const GaussRule rule = GaussRule::tensor(3);
    const double jac = 0.25 * mesh.dx() * mesh.dy();
    double sum = 0.0;
    for (std::size_t cj = 0; cj < mesh.ny(); ++cj) {
        for (std::size_t ci = 0; ci < mesh.nx(); ++ci) {
            const auto conn = mesh.cell_nodes(ci, cj);
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const auto N = fem::shape(rule.xi[q], rule.eta[q]);
                double ph = 0.0;
                for (std::size_t a = 0; a < 4; ++a) ph += N[a] * pressure.p[conn[a]];
                const Vec2 x = fem::physical_point(mesh, ci, cj, rule.xi[q], rule.eta[q]);
                const double e = ph - exact(x.x, x.y);
                sum += rule.weight[q] * jac * e * e;
            }
        }
    }
    return std::sqrt(sum);
}

} // namespace micro_reynolds

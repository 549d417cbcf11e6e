#pragma once

// 3D reconstruction on normalized layers, route-comparison reports, and CSV /
// legacy VTK export.

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "closed_form.hpp"
#include "core_model.hpp"
#include "errors.hpp"
#include "ode_oracle.hpp"
#include "parallel.hpp"
#include "reynolds_solver.hpp"

namespace micro_reynolds {

/// One sample of the reconstructed limit fields.
struct FieldSample {
    double x = 0, y = 0, z = 0;
    double u1 = 0, u2 = 0, u3 = 0;
    double w1 = 0, w2 = 0, w3 = 0;
    double p = 0;

    bool operator==(const FieldSample&) const = default;
};

/// Samples on the logical grid (node i, node j, layer l), x fastest, then y,
/// then layers; layer l sits at z3 = h(x') l / (nz - 1).
struct Field3D {
    std::size_t nx = 0, ny = 0, nz = 0;
    std::vector<FieldSample> samples;

    std::size_t index(std::size_t i, std::size_t j, std::size_t l) const { return (l * ny + j) * nx + i; }
    const FieldSample& at(std::size_t i, std::size_t j, std::size_t l) const { return samples[index(i, j, l)]; }
};

/// Nodal grad p by second-order differences: central inside, one-sided
/// three-point at the boundary.
inline std::vector<Vec2> nodal_gradient(const Mesh2D& mesh, const std::vector<double>& p) {
    const std::size_t cx = mesh.nx() + 1, cy = mesh.ny() + 1;
    const double dx = mesh.dx(), dy = mesh.dy();
    const auto d = [](const double* f, std::size_t i, std::size_t count, std::size_t stride, double step) {
        const auto at = [&](std::size_t k) { return f[k * stride]; };
        if (i == 0) return (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * step);
        if (i == count - 1) return (3.0 * at(i) - 4.0 * at(i - 1) + at(i - 2)) / (2.0 * step);
        return (at(i + 1) - at(i - 1)) / (2.0 * step);
    };
    std::vector<Vec2> g(mesh.node_count());
    for (std::size_t j = 0; j < cy; ++j) {
        for (std::size_t i = 0; i < cx; ++i) {
            g[mesh.node_index(i, j)] = {d(p.data() + j * cx, i, cx, 1, dx), d(p.data() + i, j, cy, cx, dy)};
        }
    }
    return g;
}

inline Field3D reconstruct_3d(const Mesh2D& mesh, const PressureField& pressure, const FilmGeometry& geometry,
                              const FluidParams& params, const SlipRegime& regime, const BodyForces& forces,
                              std::size_t nz) {
    if (nz < 2) throw DomainError("reconstruction needs at least 2 layers");
    if (pressure.p.size() != mesh.node_count()) throw DomainError("pressure does not match the mesh");
    const auto grad = nodal_gradient(mesh, pressure.p);
    Field3D out{mesh.nx() + 1, mesh.ny() + 1, nz, {}};
    out.samples.resize(out.nx * out.ny * nz);
    parallel_chunks(mesh.node_count(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t n = begin; n < end; ++n) {
            const Vec2 x = mesh.node(n);
            const double h = geometry.height(x.x, x.y);
            const Vec2 F = grad[n] - forces.f(x.x, x.y);
            const Vec2 g = forces.g(x.x, x.y);
            const auto pair = transverse_pair(regime, h, params, F, g);
            const std::size_t i = n % out.nx, j = n / out.nx;
            for (std::size_t l = 0; l < nz; ++l) {
                FieldSample& s = out.samples[out.index(i, j, l)];
                // the end layers are set exactly so boundary values are exact
                const double z = l + 1 == nz ? h : h * static_cast<double>(l) / static_cast<double>(nz - 1);
                s.x = x.x;
                s.y = x.y;
                s.z = z;
                s.p = pressure.p[n];
                if (l + 1 == nz) continue;
                s.u1 = pair.first.velocity(z);
                s.u2 = pair.second.velocity(z);
                if (l == 0) {
                    if (std::holds_alternative<NoSlip>(regime)) s.u1 = s.u2 = 0.0;
                    continue;
                }
                s.w1 = -pair.second.microrotation(z);
                s.w2 = pair.first.microrotation(z);
            }
        }
    });
    return out;
}

/// Per-sample comparison of the three coefficient routes.
struct DiscrepancySample {
    double x = 0, y = 0, h = 0;
    double M_printed = 0, G_printed = 0;
    double M_system = 0, G_system = 0;
    double M_oracle = 0, G_oracle = 0;
    /// printed formulas ill-conditioned or disagreeing here
    bool flagged = false;
};

struct RouteGap {
    double max = 0;
    double mean = 0;
};

struct DiscrepancyReport {
    std::string regime;
    std::uint64_t seed = 0;
    std::vector<DiscrepancySample> samples;
    RouteGap printed_vs_system_M, printed_vs_system_G;
    RouteGap system_vs_oracle_M, system_vs_oracle_G;
    RouteGap printed_vs_oracle_M, printed_vs_oracle_G;
    std::size_t flagged = 0;
};

struct DiscrepancyOptions {
    std::uint64_t seed = 20240611;
    /// interior points of the oracle grid (Richardson-extrapolated)
    std::size_t oracle_points = 400;
    /// printed-vs-system gap above which a sample is flagged
    double flag_tolerance = 1e-6;
    /// |printed denominator| / h below which a sample is flagged
    double conditioning_floor = 1e-2;
};

namespace report_detail {

/// Gap relative to the larger value, floored by the local mobility scale so
/// that G ~ 0 compares in absolute terms.
inline double gap(double a, double b, double scale) {
    if (!std::isfinite(a) || !std::isfinite(b)) return std::numeric_limits<double>::infinity();
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), scale, 1e-300});
}

inline void accumulate(RouteGap& r, double v, std::size_t count) {
    r.max = std::max(r.max, v);
    r.mean += v / static_cast<double>(count);
}

} // namespace report_detail

inline DiscrepancyReport discrepancy_report(const FilmGeometry& geometry, const FluidParams& params,
                                            const SlipRegime& regime, std::size_t sample_count,
                                            const DiscrepancyOptions& opts = {}) {
    if (sample_count == 0) throw DomainError("discrepancy report needs at least one sample");
    DiscrepancyReport rep;
    rep.regime = regime_name(regime);
    rep.seed = opts.seed;
    rep.samples.resize(sample_count);

    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> ux(0.0, geometry.domain().lx), uy(0.0, geometry.domain().ly);
    for (auto& s : rep.samples) {
        s.x = ux(rng);
        s.y = uy(rng);
        s.h = geometry.height(s.x, s.y);
    }

    parallel_chunks(sample_count, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto& s = rep.samples[i];
            const auto pm = mobility_coeffs_printed(regime, s.h, params);
            s.M_printed = pm.M;
            s.G_printed = pm.G;
            const auto probe = probe_mobility(regime, s.h, params);
            s.M_system = probe.M;
            s.G_system = probe.G;
            const auto om = solve_reduced_bvp_richardson(regime, s.h, params, {1.0, 0.0}, {}, opts.oracle_points);
            const auto og = solve_reduced_bvp_richardson(regime, s.h, params, {}, {0.0, -1.0}, opts.oracle_points);
            s.M_oracle = -oracle_average_velocity(om).x;
            s.G_oracle = oracle_average_velocity(og).x;

            bool ill = false;
            if (const auto* ps = std::get_if<PartialSlip>(&regime)) {
                const double c = 2.0 * params.N2() / params.k();
                const double den =
                    c * std::tanh(0.5 * params.k() * s.h) - s.h + params.one_minus_N2() / ps->lambda();
                ill = std::abs(den) < opts.conditioning_floor * s.h;
            }
            const double scale = std::abs(s.M_system);
            s.flagged = ill || report_detail::gap(s.M_printed, s.M_system, scale) > opts.flag_tolerance ||
                        report_detail::gap(s.G_printed, s.G_system, scale) > opts.flag_tolerance;
        }
    });

    using report_detail::accumulate;
    using report_detail::gap;
    for (const auto& s : rep.samples) {
        const double scale = std::abs(s.M_system);
        accumulate(rep.printed_vs_system_M, gap(s.M_printed, s.M_system, scale), sample_count);
        accumulate(rep.printed_vs_system_G, gap(s.G_printed, s.G_system, scale), sample_count);
        accumulate(rep.system_vs_oracle_M, gap(s.M_system, s.M_oracle, scale), sample_count);
        accumulate(rep.system_vs_oracle_G, gap(s.G_system, s.G_oracle, scale), sample_count);
        accumulate(rep.printed_vs_oracle_M, gap(s.M_printed, s.M_oracle, scale), sample_count);
        accumulate(rep.printed_vs_oracle_G, gap(s.G_printed, s.G_oracle, scale), sample_count);
        rep.flagged += s.flagged ? 1 : 0;
    }
    return rep;
}

namespace io_detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path + "' for writing: " + std::strerror(errno));
    return os;
}

inline void finish(std::ofstream& os, const std::string& path) {
    os.flush();
    if (!os) throw IoError("write to '" + path + "' failed");
}

} // namespace io_detail

inline constexpr const char* kCsvHeader = "x,y,z,u1,u2,u3,w1,w2,w3,p";

inline void export_csv(const Field3D& field, const std::string& path) {
    auto os = io_detail::open_out(path);
    os << kCsvHeader << '\n';
    std::string line;
    for (const auto& s : field.samples) {
        line.clear();
        for (double v : {s.x, s.y, s.z, s.u1, s.u2, s.u3, s.w1, s.w2, s.w3, s.p}) {
            if (!line.empty()) line += ',';
            line += io_detail::fmt17(v);
        }
        os << line << '\n';
    }
    io_detail::finish(os, path);
}

/// Reads a file written by export_csv; grid dimensions must be supplied.
inline Field3D read_csv(const std::string& path, std::size_t nx, std::size_t ny, std::size_t nz) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path + "' for reading: " + std::strerror(errno));
    std::string line;
    if (!std::getline(is, line) || line != kCsvHeader) throw IoError("'" + path + "': unexpected CSV header");
    Field3D f{nx, ny, nz, {}};
    f.samples.reserve(nx * ny * nz);
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        std::array<double, 10> v{};
        const char* c = line.c_str();
        for (std::size_t k = 0; k < v.size(); ++k) {
            char* endp = nullptr;
            v[k] = std::strtod(c, &endp);
            if (endp == c || (k + 1 < v.size() && *endp != ',') || (k + 1 == v.size() && *endp != '\0')) {
                throw IoError("'" + path + "': malformed row " + std::to_string(row));
            }
            c = endp + 1;
        }
        f.samples.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]});
    }
    if (f.samples.size() != nx * ny * nz) {
        throw IoError("'" + path + "': expected " + std::to_string(nx * ny * nz) + " rows, found " +
                      std::to_string(f.samples.size()));
    }
    return f;
}

/// Legacy ASCII structured grid with point arrays velocity, microrotation
/// and pressure.
inline void export_vtk(const Field3D& field, const std::string& path, const std::string& title = "micro_reynolds") {
    auto os = io_detail::open_out(path);
    const std::size_t n = field.samples.size();
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_GRID\n";
    os << "DIMENSIONS " << field.nx << ' ' << field.ny << ' ' << field.nz << '\n';
    os << "POINTS " << n << " double\n";
    using io_detail::fmt17;
    for (const auto& s : field.samples) os << fmt17(s.x) << ' ' << fmt17(s.y) << ' ' << fmt17(s.z) << '\n';
    os << "POINT_DATA " << n << '\n';
    os << "VECTORS velocity double\n";
    for (const auto& s : field.samples) os << fmt17(s.u1) << ' ' << fmt17(s.u2) << ' ' << fmt17(s.u3) << '\n';
    os << "VECTORS microrotation double\n";
    for (const auto& s : field.samples) os << fmt17(s.w1) << ' ' << fmt17(s.w2) << ' ' << fmt17(s.w3) << '\n';
    os << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (const auto& s : field.samples) os << fmt17(s.p) << '\n';
    io_detail::finish(os, path);
}

} // namespace micro_reynolds

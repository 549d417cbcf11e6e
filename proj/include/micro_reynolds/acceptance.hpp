#pragma once

// Acceptance suite: one entry per criterion, shared by `verify` and the
// acceptance test binary.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "closed_form.hpp"
#include "ode_oracle.hpp"
#include "pipeline.hpp"
#include "reynolds_solver.hpp"

namespace micro_reynolds {

enum class VerifyLevel { Quick, Full };

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

namespace acceptance_detail {

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

/// Sup over oracle nodes of the gap to the closed-form profiles.
inline double profile_gap(const TransverseProfile& o) {
    double e = 0;
    const double h = o.grid.height();
    for (std::size_t j = 0; j < o.grid.nodes(); ++j) {
        const double z = std::min(o.grid.z(j), h);
        const Vec2 u = velocity_profile(o.regime, h, o.params, o.F, o.g, z);
        const Vec2 w = microrotation_profile(o.regime, h, o.params, o.F, o.g, z);
        e = std::max({e, std::abs(u.x - o.u1[j]), std::abs(u.y - o.u2[j]), std::abs(w.x - o.w1[j]),
                      std::abs(w.y - o.w2[j])});
    }
    return e;
}

/// Manufactured pressure cos(pi x) cos(pi y) on the unit square.
struct Manufactured {
    double pi = std::acos(-1.0);
    FilmGeometry geometry{Rectangle{1.0, 1.0},
                          [pi = std::acos(-1.0)](double x, double y) {
                              return 1.0 + 0.3 * std::sin(2 * pi * x) * std::sin(2 * pi * y);
                          },
                          0.7, 1.3};
    double q(double x, double y) const { return std::cos(pi * x) * std::cos(pi * y); }
    BodyForces forces(bool with_g) const {
        BodyForces b;
        const double p = pi;
        b.f = [p](double x, double y) {
            return Vec2{-p * std::sin(p * x) * std::cos(p * y), -p * std::cos(p * x) * std::sin(p * y)};
        };
        if (with_g) b.g = [](double x, double y) { return Vec2{1.0 + x * y, std::sin(3.0 * x) - y}; };
        return b;
    }
};

inline double pressure_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0, n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += (a[i] - b[i]) * (a[i] - b[i]);
        n += b[i] * b[i];
    }
    return std::sqrt(d) / std::max(std::sqrt(n), 1e-300);
}

/// Worst conservation figures over every Reynolds solve the suite performs.
struct ConservationLog {
    double flux = 0;
    double mean = 0;
    std::size_t solves = 0;

    void record(const Solution& s) {
        double pn = 0;
        for (double v : s.pressure.p) pn += v * v;
        pn = std::sqrt(pn);
        flux = std::max(flux, s.flux.flux_norm > 0 ? std::abs(s.flux.boundary_flux) / s.flux.flux_norm : 0.0);
        mean = std::max(mean, pn > 0 ? std::abs(s.pressure.constraint_value) / pn : 0.0);
        ++solves;
    }
    void record(const Json& manifest) {
        const double norm = manifest.at("flux").at("flux_norm").get<double>();
        const double b = std::abs(manifest.at("flux").at("boundary_flux").get<double>());
        flux = std::max(flux, norm > 0 ? b / norm : 0.0);
        mean = std::max(mean, manifest.at("solver").at("constraint_relative").get<double>());
        ++solves;
    }
};

inline std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace acceptance_detail

inline std::vector<CriterionResult> run_acceptance(VerifyLevel level) {
    using namespace acceptance_detail;
    std::vector<CriterionResult> out;
    const bool full = level == VerifyLevel::Full;
    const FluidParams base(0.5, 0.75);
    const Vec2 F{1.0, 0.0}, G{0.0, 1.0};
    ConservationLog conservation;

    const auto run = [&](int id, const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
        CriterionResult r{id, name, false, "", 0};
        const auto t0 = std::chrono::steady_clock::now();
        try {
            std::tie(r.pass, r.detail) = body();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(r);
    };

    run(1, "oracle vs closed form, no-slip", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto o = solve_reduced_bvp_richardson(NoSlip{}, 1.0, base, F, G, 2000);
        const double gap = profile_gap(o);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return std::pair{gap <= 1e-6 && secs < 1.0, "sup gap " + sci(gap) + " <= 1e-6, oracle " + sci(secs) + " s < 1 s"};
    });

    run(2, "oracle vs closed form, perfect slip", [&] {
        const auto o = solve_reduced_bvp_richardson(PerfectSlip{}, 1.0, base, F, G, 2000);
        const double gap = profile_gap(o);
        const double d = 1e-6;
        const auto u = [&](double z) { return velocity_profile(PerfectSlip{}, 1.0, base, F, G, z); };
        const Vec2 slope = (0.5 / d) * (-3.0 * u(0.0) + 4.0 * u(d) - u(2 * d));
        const double s = norm(slope);
        return std::pair{gap <= 1e-6 && s <= 1e-5, "sup gap " + sci(gap) + " <= 1e-6, |du/dz(0)| " + sci(s) + " <= 1e-5"};
    });

    run(3, "partial slip Robin consistency", [&] {
        bool ok = true;
        std::string d;
        for (double lambda : {0.1, 1.0, 10.0}) {
            const auto o = solve_reduced_bvp_richardson(PartialSlip{lambda}, 1.0, base, F, G, 2000);
            const double robin = norm(o.bottom_condition_residual()) / norm(F);
            const double gap = profile_gap(o);
            const auto pm = mobility_coeffs_printed(PartialSlip{lambda}, 1.0, base);
            const double printed_gap = detail::rel_gap(pm.M, probe_mobility(PartialSlip{lambda}, 1.0, base).M);
            ok = ok && robin <= 1e-5 && gap <= 1e-6;
            d += "lambda=" + sci(lambda) + ": robin " + sci(robin) + ", gap " + sci(gap) + " (printed M gap " +
                 sci(printed_gap) + "); ";
        }
        return std::pair{ok, d + "limits 1e-5 / 1e-6"};
    });

    run(4, "lambda -> infinity collapse", [&] {
        const double m0 = probe_mobility(NoSlip{}, 1.0, base).M;
        const double d3 = probe_mobility(PartialSlip{1e3}, 1.0, base).M - m0;
        const double d4 = probe_mobility(PartialSlip{1e4}, 1.0, base).M - m0;
        const double ratio = std::abs(d3) / std::abs(d4);
        // slip only adds flux, so the collapse approaches from above
        const bool above = d3 > 0.0 && d4 > 0.0;
        return std::pair{ratio >= 8.0 && ratio <= 12.0 && above,
                         "error ratio " + sci(ratio) + " in [8, 12], approach from above: " + (above ? "yes" : "no")};
    });

    run(5, "classical Reynolds limit", [&] {
        const FluidParams p(1e-4, 1.0);
        const double phi = std::abs(mobility_phi(1.0, p) - 1.0 / 12.0);
        const double m = std::abs(probe_mobility(NoSlip{}, 1.0, p).M * p.one_minus_N2() - 1.0 / 12.0);
        return std::pair{phi <= 1e-6 && m <= 1e-5, "|Phi - 1/12| " + sci(phi) + " <= 1e-6, |M(1-N^2)/h^3 - 1/12| " +
                                                        sci(m) + " <= 1e-5"};
    });

    run(6, "Psi = 0 identity", [&] {
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> un(0.05, 0.95), ulog(-2.0, 2.0), uh(0.2, 5.0), ug(-1.0, 1.0);
        double worst_cf = 0, worst_or = 0;
        const std::size_t n = full ? 1000 : 200;
        for (int i = 0; i < 20; ++i) {
            const FluidParams p(un(rng), std::pow(10.0, ulog(rng)));
            const double h = uh(rng);
            const Vec2 g{ug(rng), ug(rng)};
            worst_cf = std::max(worst_cf, norm(average_velocity(NoSlip{}, h, p, {}, g)));
            worst_or = std::max(worst_or, norm(oracle_average_velocity(solve_reduced_bvp(NoSlip{}, h, p, {}, g, n))));
        }
        return std::pair{worst_cf <= 1e-7 && worst_or <= 1e-7,
                         "closed form " + sci(worst_cf) + ", oracle " + sci(worst_or) + " <= 1e-7 over 20 draws"};
    });

    run(7, "reduced BVP discretization order", [&] {
        const std::vector<std::size_t> ns = full ? std::vector<std::size_t>{39, 79, 159, 319}
                                                 : std::vector<std::size_t>{19, 39, 79};
        bool ok = true;
        std::string d;
        for (const SlipRegime& r : {SlipRegime{NoSlip{}}, SlipRegime{PerfectSlip{}}, SlipRegime{PartialSlip{1.0}}}) {
            const double order = convergence_order(r, 1.0, base, F, G, ns);
            ok = ok && order >= 1.9 && order <= 2.1;
            d += regime_name(r) + " " + sci(order) + "; ";
        }
        return std::pair{ok, d + "in [1.9, 2.1]"};
    });

    const Manufactured mfg;
    const SolverOptions sopts;
    run(8, "manufactured Reynolds solution", [&] {
        bool ok = true;
        std::string d;
        const auto t0 = std::chrono::steady_clock::now();
        for (const SlipRegime& r : {SlipRegime{NoSlip{}}, SlipRegime{PerfectSlip{}}, SlipRegime{PartialSlip{1.0}}}) {
            std::vector<double> errs;
            for (std::size_t n : {16, 32, 64}) {
                const Mesh2D mesh({1.0, 1.0}, n, n);
                const Solution s = solve_on_mesh(mfg.geometry, base, r, mfg.forces(false), CoefficientSource::Probe,
                                                 mesh, sopts, true);
                conservation.record(s);
                const double ih = integrate(mesh, [&](double x, double y) { return mfg.geometry.height(x, y); });
                const double ihq = integrate(mesh, [&](double x, double y) { return mfg.geometry.height(x, y) * mfg.q(x, y); });
                errs.push_back(l2_error(mesh, s.pressure, [&](double x, double y) { return mfg.q(x, y) - ihq / ih; }));
            }
            const double r1 = errs[0] / errs[1], r2 = errs[1] / errs[2];
            ok = ok && r1 >= 3.6 && r1 <= 4.4 && r2 >= 3.6 && r2 <= 4.4 && errs[2] <= 5e-4;
            d += regime_name(r) + " ratios " + sci(r1) + ", " + sci(r2) + " err64 " + sci(errs[2]) + "; ";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ok = ok && secs < 30.0;
        return std::pair{ok, d + "ratios in [3.6, 4.4], err64 <= 5e-4, " + sci(secs) + " s < 30 s"};
    });

    run(10, "no-slip pressure independent of g", [&] {
        const Mesh2D mesh({1.0, 1.0}, 32, 32);
        double worst = 0;
        std::string d;
        for (CoefficientSource src : {CoefficientSource::Probe, CoefficientSource::Printed}) {
            const Solution a = solve_on_mesh(mfg.geometry, base, NoSlip{}, mfg.forces(false), src, mesh, sopts, true);
            const Solution b = solve_on_mesh(mfg.geometry, base, NoSlip{}, mfg.forces(true), src, mesh, sopts, true);
            conservation.record(a);
            conservation.record(b);
            const double gap = pressure_distance(b.pressure.p, a.pressure.p);
            worst = std::max(worst, gap);
            d += std::string(src == CoefficientSource::Probe ? "probe " : "printed ") + sci(gap) + "; ";
        }
        return std::pair{worst <= sopts.tolerance, d + "relative difference <= " + sci(sopts.tolerance)};
    });

    run(11, "solve determinism", [&] {
        const auto dir = std::filesystem::temp_directory_path() /
                         ("micro_reynolds_verify_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(dir);
        const Json cfg = {{"run_name", "determinism"},
                          {"geometry", {{"lx", 1.0}, {"ly", 1.0}, {"h", "1 + 0.3*sin(2*pi*x)*sin(2*pi*y)"}}},
                          {"fluid", {{"N", 0.5}, {"Rc", 0.75}}},
                          {"regime", {{"kind", "partial"}, {"lambda", 1.0}}},
                          {"forces", {{"f", {"-pi*sin(pi*x)*cos(pi*y)", "1 + x*y"}}, {"g", {"cos(y)", "x"}}}},
                          {"mesh", {{"nx", 16}, {"ny", 12}, {"nz", 5}}},
                          {"output", {{"formats", {"csv"}}, {"path", dir.string()}}}};
        const std::string cfg_path = (dir / "determinism.json").string();
        write_json(cfg, cfg_path);
        std::string csv[2];
        for (int i = 0; i < 2; ++i) {
            const SolveResult r = run_solve(cfg_path);
            if (r.status != kExitOk) throw SolverDivergence("solve failed: " + r.manifest.dump());
            conservation.record(r.manifest);
            csv[i] = read_file((dir / "determinism.csv").string());
            std::filesystem::remove(dir / "determinism.csv");
        }
        std::filesystem::remove_all(dir);
        const bool same = !csv[0].empty() && csv[0] == csv[1];
        return std::pair{same, std::string(same ? "byte-identical" : "outputs differ") + " CSV (" +
                                   std::to_string(csv[0].size()) + " bytes)"};
    });

    run(9, "conservation over every solve", [&] {
        const bool ok = conservation.solves > 0 && conservation.flux <= 1e-8 && conservation.mean <= 1e-10;
        return std::pair{ok, std::to_string(conservation.solves) + " solves: |boundary flux|/||U'|| " +
                                 sci(conservation.flux) + " <= 1e-8, |int h p|/||p|| " + sci(conservation.mean) +
                                 " <= 1e-10"};
    });

    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return out;
}

inline std::string format_result(const CriterionResult& r) {
    char head[96];
    std::snprintf(head, sizeof head, "[%s] %2d %-38s", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str());
    char tail[32];
    std::snprintf(tail, sizeof tail, " (%.2f s)", r.seconds);
    return std::string(head) + " " + r.detail + tail;
}

} // namespace micro_reynolds

#pragma once

// solve and sweep pipelines behind the CLI. Both return an exit status and a
// JSON document; the solve manifest is written even when a stage fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "closed_form.hpp"
#include "config.hpp"
#include "core_model.hpp"
#include "errors.hpp"
#include "expression.hpp"
#include "postprocess.hpp"
#include "reynolds_solver.hpp"

namespace micro_reynolds {

enum ExitCode : int { kExitOk = 0, kExitVerifyFailed = 1, kExitConfig = 2, kExitRuntime = 3 };

inline Json error_json(const std::string& stage, const std::exception& e) {
    Json j{{"stage", stage}, {"message", e.what()}};
    if (const auto* me = dynamic_cast<const Error*>(&e)) j["kind"] = me->kind();
    else j["kind"] = "InternalError";
    if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) j["field"] = ce->field();
    return j;
}

inline int exit_code_for(const std::exception& e) {
    return dynamic_cast<const ConfigError*>(&e) ? kExitConfig : kExitRuntime;
}

inline void write_json(const Json& j, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << j.dump(2) << '\n';
    if (!os) throw IoError("write to '" + path + "' failed");
}

struct SolveResult {
    int status = kExitOk;
    Json manifest;
    std::string manifest_path;
    /// everything computed, for callers that keep going in-process
    std::optional<PressureField> pressure;
    std::optional<FluxField> flux;
};

namespace pipeline_detail {

class StageTimer {
public:
    explicit StageTimer(Json& timings) : timings_(timings) {}

    template <class Fn>
    auto run(const std::string& stage, Fn&& fn) {
        current = stage;
        const auto t0 = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            record(stage, t0);
        } else {
            auto r = fn();
            record(stage, t0);
            return r;
        }
    }
    std::string current = "config";

private:
    void record(const std::string& stage, std::chrono::steady_clock::time_point t0) {
        timings_[stage] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    Json& timings_;
};

inline Json range_json(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return {{"min", *lo}, {"max", *hi}};
}

struct ManufacturedError {
    double l2 = 0;
    double shift = 0;
};

/// L2 distance to q - (int h q / int h) (or the plain mean when unweighted).
inline ManufacturedError manufactured_error(const Mesh2D& mesh, const PressureField& p, const FilmGeometry& geo,
                                            const Expression& q, bool weighted) {
    const auto w = [&](double x, double y) { return weighted ? geo.height(x, y) : 1.0; };
    const double wq = integrate(mesh, [&](double x, double y) { return w(x, y) * q(x, y); });
    const double ww = integrate(mesh, w);
    const double shift = wq / ww;
    return {l2_error(mesh, p, [&](double x, double y) { return q(x, y) - shift; }), shift};
}

} // namespace pipeline_detail

/// Pressure, flux and diagnostics on one mesh.
struct Solution {
    Mesh2D mesh;
    MobilityField mobility;
    PressureField pressure;
    FluxField flux;
};

inline Solution solve_on_mesh(const FilmGeometry& geo, const FluidParams& params, const SlipRegime& regime,
                              const BodyForces& forces, CoefficientSource source, const Mesh2D& mesh,
                              const SolverOptions& opts, bool weighted_mean,
                              const std::function<void(const std::string&)>& stage = {}) {
    const auto enter = [&](const char* s) {
        if (stage) stage(s);
    };
    enter("geometry");
    geo.validate_nodes(mesh.nodes());
    enter("mobility");
    MobilityField mob = build_mobility_field(geo, params, regime, forces, source, mesh);
    enter("assemble");
    const ReynoldsSystem sys = assemble(mesh, mob, weighted_mean);
    enter("solve");
    PressureField p = solve_pressure(sys, opts);
    enter("flux");
    FluxField f = flux_field(mesh, p, mob);
    return {mesh, std::move(mob), std::move(p), std::move(f)};
}

/// Full solve pipeline. The manifest goes to <output.path>/<run_name>.manifest.json,
/// or to ./<config stem>.manifest.json when the config itself is unusable.
inline SolveResult run_solve(const std::string& config_path) {
    using namespace pipeline_detail;
    SolveResult res;
    Json& man = res.manifest;
    man["status"] = "running";
    man["config_file"] = config_path;
    man["timings_s"] = Json::object();
    StageTimer timer(man["timings_s"]);
    std::filesystem::path cfg_path(config_path);
    res.manifest_path = cfg_path.stem().string() + ".manifest.json";

    std::optional<RunConfig> cfg;
    try {
        cfg = timer.run("config", [&] { return load_config(config_path); });
        man["config"] = cfg->source;
        man["run_name"] = cfg->run_name;
        std::filesystem::create_directories(cfg->output_path);
        res.manifest_path =
            (std::filesystem::path(cfg->output_path) / (cfg->run_name + ".manifest.json")).string();

        const FluidParams params(cfg->N, cfg->Rc);
        const FilmGeometry geo = make_geometry(*cfg);
        const BodyForces forces = make_forces(*cfg);
        const Mesh2D mesh(cfg->domain, cfg->nx, cfg->ny);
        man["parameters"] = {{"N", params.N()}, {"Rc", params.Rc()}, {"k", params.k()},
                             {"regime", regime_name(cfg->regime)}};
        if (const auto* ps = std::get_if<PartialSlip>(&cfg->regime)) man["parameters"]["lambda"] = ps->lambda();

        auto t0 = std::chrono::steady_clock::now();
        std::string last_stage;
        const auto mark = [&](const std::string& s) {
            const auto now = std::chrono::steady_clock::now();
            if (!last_stage.empty()) man["timings_s"][last_stage] = std::chrono::duration<double>(now - t0).count();
            timer.current = last_stage = s;
            t0 = now;
        };
        Solution sol = solve_on_mesh(geo, params, cfg->regime, forces, cfg->coefficients, mesh, cfg->solver,
                                     cfg->weighted_mean, mark);
        mark("reconstruct");

        const double pnorm = std::sqrt(std::inner_product(sol.pressure.p.begin(), sol.pressure.p.end(),
                                                          sol.pressure.p.begin(), 0.0));
        const double cons_rel = pnorm > 0 ? std::abs(sol.pressure.constraint_value) / pnorm : 0.0;
        const double flux_rel = sol.flux.relative_boundary_flux();
        man["mobility"] = {{"M", range_json(sol.mobility.node_M)}, {"G", range_json(sol.mobility.node_G)},
                           {"source", cfg->coefficients == CoefficientSource::Probe ? "probe" : "printed"}};
        man["solver"] = {{"relative_residual", sol.pressure.relative_residual},
                         {"tolerance", cfg->solver.tolerance},
                         {"constraint_value", sol.pressure.constraint_value},
                         {"constraint_relative", cons_rel},
                         {"multiplier", sol.pressure.multiplier},
                         {"weighted_mean", cfg->weighted_mean},
                         {"unknowns", mesh.node_count()}};
        man["flux"] = {{"boundary_flux", sol.flux.boundary_flux},
                       {"boundary_flux_abs", sol.flux.boundary_flux_abs},
                       {"boundary_flux_relative", flux_rel},
                       {"divergence_residual", sol.flux.divergence_residual},
                       {"flux_norm", sol.flux.flux_norm},
                       {"source_norm", sol.flux.source_norm},
                       {"conservation_ok", flux_rel <= cfg->flux_tolerance &&
                                               cons_rel <= cfg->solver.constraint_tolerance}};

        const Field3D field = reconstruct_3d(mesh, sol.pressure, geo, params, cfg->regime, forces, cfg->nz);
        mark("export");
        Json outputs = Json::array();
        for (const auto& fm : cfg->formats) {
            const std::string path =
                (std::filesystem::path(cfg->output_path) / (cfg->run_name + "." + fm)).string();
            if (fm == "csv") export_csv(field, path);
            else export_vtk(field, path, cfg->run_name);
            outputs.push_back(path);
        }
        man["outputs"] = outputs;

        if (cfg->manufactured_q) {
            mark("manufactured");
            const Expression q = Expression::parse(*cfg->manufactured_q);
            const auto e = manufactured_error(mesh, sol.pressure, geo, q, cfg->weighted_mean);
            Json m{{"q", *cfg->manufactured_q}, {"l2_error", e.l2}, {"mean_shift", e.shift}};
            if (cfg->nx % 2 == 0 && cfg->ny % 2 == 0 && cfg->nx >= 8 && cfg->ny >= 8) {
                const Mesh2D coarse(cfg->domain, cfg->nx / 2, cfg->ny / 2);
                const Solution cs = solve_on_mesh(geo, params, cfg->regime, forces, cfg->coefficients, coarse,
                                                  cfg->solver, cfg->weighted_mean);
                const auto ec = manufactured_error(coarse, cs.pressure, geo, q, cfg->weighted_mean);
                m["coarse_mesh"] = {cfg->nx / 2, cfg->ny / 2};
                m["coarse_l2_error"] = ec.l2;
                m["error_ratio"] = ec.l2 / e.l2;
                m["observed_order"] = std::log2(ec.l2 / e.l2);
            }
            man["manufactured"] = m;
        }

        if (cfg->report_samples > 0) {
            mark("report");
            DiscrepancyOptions ro;
            ro.seed = cfg->seed;
            const auto rep = discrepancy_report(geo, params, cfg->regime, cfg->report_samples, ro);
            const auto gap = [](const RouteGap& g) { return Json{{"max", g.max}, {"mean", g.mean}}; };
            man["discrepancy"] = {{"samples", rep.samples.size()},
                                  {"seed", rep.seed},
                                  {"flagged", rep.flagged},
                                  {"printed_vs_system", {{"M", gap(rep.printed_vs_system_M)}, {"G", gap(rep.printed_vs_system_G)}}},
                                  {"system_vs_oracle", {{"M", gap(rep.system_vs_oracle_M)}, {"G", gap(rep.system_vs_oracle_G)}}},
                                  {"printed_vs_oracle", {{"M", gap(rep.printed_vs_oracle_M)}, {"G", gap(rep.printed_vs_oracle_G)}}}};
        }
        mark("done");
        man["status"] = "ok";
        res.pressure = std::move(sol.pressure);
        res.flux = std::move(sol.flux);
    } catch (const std::exception& e) {
        man["status"] = "failed";
        man["error"] = error_json(timer.current, e);
        res.status = exit_code_for(e);
    }
    try {
        write_json(man, res.manifest_path);
    } catch (const std::exception& e) {
        if (res.status == kExitOk) {
            man["status"] = "failed";
            man["error"] = error_json("manifest", e);
            res.status = kExitRuntime;
        }
    }
    return res;
}

enum class SweepAxis { Lambda, N, Rc, H };

inline SweepAxis parse_axis(const std::string& s) {
    if (s == "lambda") return SweepAxis::Lambda;
    if (s == "N") return SweepAxis::N;
    if (s == "Rc") return SweepAxis::Rc;
    if (s == "h") return SweepAxis::H;
    throw ConfigError("--axis", "expected lambda, N, Rc or h");
}

inline std::vector<double> parse_values(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const std::string t = item.substr(b, item.find_last_not_of(" \t") - b + 1);
        char* end = nullptr;
        const double v = std::strtod(t.c_str(), &end);
        if (end == t.c_str() || *end != '\0' || !std::isfinite(v)) throw ConfigError("--values", "not a number: '" + t + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("--values", "empty value list");
    return out;
}

struct SweepRow {
    double value = 0, N = 0, Rc = 0, h = 0;
    std::string regime;
    double M = 0, G = 0;
    double M_noslip = 0;
    double noslip_distance = 0;
};

/// Probed mobilities along one parameter axis; lambda sweeps force the
/// partial regime.
inline std::vector<SweepRow> sweep_mobility(const RunConfig& cfg, SweepAxis axis, const std::vector<double>& values) {
    double h0 = 0;
    if (cfg.sweep_h) h0 = *cfg.sweep_h;
    else h0 = make_geometry(cfg).height(0.5 * cfg.domain.lx, 0.5 * cfg.domain.ly);
    std::vector<SweepRow> rows(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        const char* field = axis == SweepAxis::Lambda ? "lambda" : axis == SweepAxis::N ? "N" : axis == SweepAxis::Rc ? "Rc" : "h";
        if (!(v > 0.0) || (axis == SweepAxis::N && !(v < 1.0))) {
            throw ConfigError(std::string("--values"), std::string("invalid ") + field + " value " + std::to_string(v));
        }
    }
    parallel_chunks(values.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double v = values[i];
            SweepRow r;
            r.value = v;
            r.N = axis == SweepAxis::N ? v : cfg.N;
            r.Rc = axis == SweepAxis::Rc ? v : cfg.Rc;
            r.h = axis == SweepAxis::H ? v : h0;
            const SlipRegime regime = axis == SweepAxis::Lambda ? SlipRegime{PartialSlip{v}} : cfg.regime;
            const FluidParams p(r.N, r.Rc);
            r.regime = regime_name(regime);
            const auto m = probe_mobility(regime, r.h, p);
            r.M = m.M;
            r.G = m.G;
            r.M_noslip = probe_mobility(NoSlip{}, r.h, p).M;
            r.noslip_distance = std::abs(r.M - r.M_noslip);
            rows[i] = r;
        }
    });
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows, const std::string& axis) {
    std::string out = axis + ",N,Rc,h,regime,M,G,M_noslip,noslip_distance\n";
    using io_detail::fmt17;
    for (const auto& r : rows) {
        out += fmt17(r.value) + ',' + fmt17(r.N) + ',' + fmt17(r.Rc) + ',' + fmt17(r.h) + ',' + r.regime + ',' +
               fmt17(r.M) + ',' + fmt17(r.G) + ',' + fmt17(r.M_noslip) + ',' + fmt17(r.noslip_distance) + '\n';
    }
    return out;
}

struct SweepResult {
    int status = kExitOk;
    std::string csv_path;
    Json error;
};

inline SweepResult run_sweep(const std::string& config_path, const std::string& axis_name,
                             const std::string& values_list) {
    SweepResult res;
    std::string stage = "config";
    try {
        const SweepAxis axis = parse_axis(axis_name);
        const auto values = parse_values(values_list);
        const RunConfig cfg = load_config(config_path);
        stage = "sweep";
        const auto rows = sweep_mobility(cfg, axis, values);
        stage = "export";
        std::filesystem::create_directories(cfg.output_path);
        res.csv_path = (std::filesystem::path(cfg.output_path) / (cfg.run_name + ".sweep_" + axis_name + ".csv")).string();
        std::ofstream os(res.csv_path, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open '" + res.csv_path + "' for writing");
        os << sweep_csv(rows, axis_name);
        if (!os) throw IoError("write to '" + res.csv_path + "' failed");
    } catch (const std::exception& e) {
        res.status = exit_code_for(e);
        res.error = error_json(stage, e);
    }
    return res;
}

} // namespace micro_reynolds

#pragma once

// JSON run configuration. Every failure is a ConfigError naming the dotted
// path of the offending entry. Schema: docs in README.md.

#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "core_model.hpp"
#include "errors.hpp"
#include "expression.hpp"
#include "reynolds_solver.hpp"

namespace micro_reynolds {

using Json = nlohmann::json;

struct HeightSpec {
    /// analytic descriptor, empty when a sampled grid is given
    std::string expression;
    std::size_t grid_nx = 0, grid_ny = 0;
    std::vector<double> grid_values;
};

struct RunConfig {
    std::string run_name = "run";
    Rectangle domain{1.0, 1.0};
    HeightSpec height;
    double h_min = std::numeric_limits<double>::min();
    double h_max = std::numeric_limits<double>::infinity();
    double N = 0.5, Rc = 0.75;
    SlipRegime regime = NoSlip{};
    std::array<std::string, 2> f{"0", "0"}, g{"0", "0"};
    std::size_t nx = 32, ny = 32, nz = 9;
    SolverOptions solver;
    /// bound on |boundary flux| / ||U'|| reported by the conservation check
    double flux_tolerance = 1e-8;
    CoefficientSource coefficients = CoefficientSource::Probe;
    bool weighted_mean = true;
    std::vector<std::string> formats{"csv"};
    std::string output_path = ".";
    std::uint64_t seed = 1;
    /// exact pressure for manufactured-solution runs
    std::optional<std::string> manufactured_q;
    /// discrepancy samples recorded in the manifest (0 disables)
    std::size_t report_samples = 0;
    /// height used by sweeps; defaults to h at the domain center
    std::optional<double> sweep_h;
    /// raw document, echoed in the manifest
    Json source;
};

namespace config_detail {

inline void reject_unknown(const Json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [k, v] : obj.items()) {
        if (!keys.count(k)) throw ConfigError(where.empty() ? k : where + "." + k, "unknown key");
    }
}

inline const Json* child(const Json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

inline const Json& object(const Json& obj, const char* key, const std::string& where) {
    const Json* c = child(obj, key);
    if (!c || !c->is_object()) throw ConfigError(where, "expected an object");
    return *c;
}

inline double number(const Json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(where, "must be finite");
    return d;
}

inline std::size_t count(const Json& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(where, "expected a non-negative integer");
    return static_cast<std::size_t>(v.get<long long>());
}

inline std::string expression(const Json& v, const std::string& where) {
    std::string text;
    if (v.is_string()) text = v.get<std::string>();
    else if (v.is_number()) text = v.dump();
    else throw ConfigError(where, "expected an expression string");
    try {
        (void)Expression::parse(text);
    } catch (const ExpressionError& e) {
        throw ConfigError(where, std::string("cannot parse '") + text + "': " + e.what());
    }
    return text;
}

inline std::array<std::string, 2> vector_field(const Json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(where, "expected two component expressions");
    return {expression(v[0], where + "[0]"), expression(v[1], where + "[1]")};
}

} // namespace config_detail

inline RunConfig parse_config(const Json& doc) {
    using namespace config_detail;
    if (!doc.is_object()) throw ConfigError("<root>", "expected a JSON object");
    reject_unknown(doc, "", {"run_name", "geometry", "fluid", "regime", "forces", "mesh", "solver", "output", "seed",
                             "manufactured", "report", "sweep"});
    RunConfig c;
    c.source = doc;

    if (const Json* v = child(doc, "run_name")) {
        if (!v->is_string() || v->get<std::string>().empty()) throw ConfigError("run_name", "expected a non-empty string");
        c.run_name = v->get<std::string>();
        if (c.run_name.find_first_of("/\\") != std::string::npos) throw ConfigError("run_name", "must not contain path separators");
    }

    const Json& geo = object(doc, "geometry", "geometry");
    reject_unknown(geo, "geometry", {"lx", "ly", "h", "h_min", "h_max"});
    if (const Json* v = child(geo, "lx")) c.domain.lx = number(*v, "geometry.lx");
    if (const Json* v = child(geo, "ly")) c.domain.ly = number(*v, "geometry.ly");
    if (!(c.domain.lx > 0.0)) throw ConfigError("geometry.lx", "must be positive");
    if (!(c.domain.ly > 0.0)) throw ConfigError("geometry.ly", "must be positive");
    const Json* h = child(geo, "h");
    if (!h) throw ConfigError("geometry.h", "missing height descriptor");
    if (h->is_object()) {
        reject_unknown(*h, "geometry.h", {"nx", "ny", "values"});
        const Json* nx = child(*h, "nx");
        const Json* ny = child(*h, "ny");
        const Json* vals = child(*h, "values");
        if (!nx) throw ConfigError("geometry.h.nx", "missing");
        if (!ny) throw ConfigError("geometry.h.ny", "missing");
        c.height.grid_nx = count(*nx, "geometry.h.nx");
        c.height.grid_ny = count(*ny, "geometry.h.ny");
        if (c.height.grid_nx < 1 || c.height.grid_ny < 1) throw ConfigError("geometry.h", "grid needs nx, ny >= 1");
        if (!vals || !vals->is_array() || vals->size() != (c.height.grid_nx + 1) * (c.height.grid_ny + 1)) {
            throw ConfigError("geometry.h.values", "expected (nx+1)*(ny+1) numbers");
        }
        for (std::size_t i = 0; i < vals->size(); ++i) {
            c.height.grid_values.push_back(number((*vals)[i], "geometry.h.values[" + std::to_string(i) + "]"));
        }
    } else {
        c.height.expression = expression(*h, "geometry.h");
    }
    if (const Json* v = child(geo, "h_min")) c.h_min = number(*v, "geometry.h_min");
    if (const Json* v = child(geo, "h_max")) c.h_max = number(*v, "geometry.h_max");
    if (!(c.h_min > 0.0)) throw ConfigError("geometry.h_min", "must be positive");
    if (!(c.h_min <= c.h_max)) throw ConfigError("geometry.h_max", "must be at least h_min");

    const Json& fluid = object(doc, "fluid", "fluid");
    reject_unknown(fluid, "fluid", {"N", "Rc"});
    if (const Json* v = child(fluid, "N")) c.N = number(*v, "fluid.N");
    else throw ConfigError("fluid.N", "missing");
    if (const Json* v = child(fluid, "Rc")) c.Rc = number(*v, "fluid.Rc");
    else throw ConfigError("fluid.Rc", "missing");
    if (!(c.N > 0.0 && c.N < 1.0)) throw ConfigError("fluid.N", "must lie in (0, 1)");
    if (!(c.Rc > 0.0)) throw ConfigError("fluid.Rc", "must be positive");

    const Json& reg = object(doc, "regime", "regime");
    reject_unknown(reg, "regime", {"kind", "lambda", "gamma"});
    const Json* kind = child(reg, "kind");
    const Json* gamma = child(reg, "gamma");
    const Json* lambda = child(reg, "lambda");
    const auto read_lambda = [&]() {
        if (!lambda) throw ConfigError("regime.lambda", "required for partial slip");
        const double l = number(*lambda, "regime.lambda");
        if (!(l > 0.0)) throw ConfigError("regime.lambda", "must be positive");
        return l;
    };
    if (kind && gamma) throw ConfigError("regime", "give either kind or gamma, not both");
    if (kind) {
        const std::string k = kind->is_string() ? kind->get<std::string>() : "";
        if (k == "perfect") c.regime = PerfectSlip{};
        else if (k == "noslip") c.regime = NoSlip{};
        else if (k == "partial") c.regime = PartialSlip{read_lambda()};
        else throw ConfigError("regime.kind", "expected perfect, partial or noslip");
    } else if (gamma) {
        const double gm = number(*gamma, "regime.gamma");
        c.regime = regime_from_gamma(gm, gm == -1.0 ? read_lambda() : 1.0);
    } else {
        throw ConfigError("regime.kind", "missing regime (kind or gamma)");
    }

    if (const Json* forces = child(doc, "forces")) {
        if (!forces->is_object()) throw ConfigError("forces", "expected an object");
        reject_unknown(*forces, "forces", {"f", "g"});
        if (const Json* v = child(*forces, "f")) c.f = vector_field(*v, "forces.f");
        if (const Json* v = child(*forces, "g")) c.g = vector_field(*v, "forces.g");
    }

    if (const Json* mesh = child(doc, "mesh")) {
        if (!mesh->is_object()) throw ConfigError("mesh", "expected an object");
        reject_unknown(*mesh, "mesh", {"nx", "ny", "nz"});
        if (const Json* v = child(*mesh, "nx")) c.nx = count(*v, "mesh.nx");
        if (const Json* v = child(*mesh, "ny")) c.ny = count(*v, "mesh.ny");
        if (const Json* v = child(*mesh, "nz")) c.nz = count(*v, "mesh.nz");
        if (c.nx < 4) throw ConfigError("mesh.nx", "must be at least 4");
        if (c.ny < 4) throw ConfigError("mesh.ny", "must be at least 4");
        if (c.nz < 2) throw ConfigError("mesh.nz", "must be at least 2");
    }

    if (const Json* s = child(doc, "solver")) {
        if (!s->is_object()) throw ConfigError("solver", "expected an object");
        reject_unknown(*s, "solver", {"tolerance", "constraint_tolerance", "flux_tolerance", "refinement_steps",
                                      "coefficients", "weighted_mean"});
        if (const Json* v = child(*s, "tolerance")) c.solver.tolerance = number(*v, "solver.tolerance");
        if (const Json* v = child(*s, "constraint_tolerance")) {
            c.solver.constraint_tolerance = number(*v, "solver.constraint_tolerance");
        }
        if (const Json* v = child(*s, "flux_tolerance")) c.flux_tolerance = number(*v, "solver.flux_tolerance");
        if (const Json* v = child(*s, "refinement_steps")) {
            c.solver.refinement_steps = static_cast<int>(count(*v, "solver.refinement_steps"));
        }
        if (!(c.solver.tolerance > 0.0)) throw ConfigError("solver.tolerance", "must be positive");
        if (!(c.solver.constraint_tolerance > 0.0)) throw ConfigError("solver.constraint_tolerance", "must be positive");
        if (!(c.flux_tolerance > 0.0)) throw ConfigError("solver.flux_tolerance", "must be positive");
        if (const Json* v = child(*s, "coefficients")) {
            const std::string src = v->is_string() ? v->get<std::string>() : "";
            if (src == "probe") c.coefficients = CoefficientSource::Probe;
            else if (src == "printed") c.coefficients = CoefficientSource::Printed;
            else throw ConfigError("solver.coefficients", "expected probe or printed");
        }
        if (const Json* v = child(*s, "weighted_mean")) {
            if (!v->is_boolean()) throw ConfigError("solver.weighted_mean", "expected true or false");
            c.weighted_mean = v->get<bool>();
        }
    }

    if (const Json* o = child(doc, "output")) {
        if (!o->is_object()) throw ConfigError("output", "expected an object");
        reject_unknown(*o, "output", {"formats", "path"});
        if (const Json* v = child(*o, "formats")) {
            if (!v->is_array()) throw ConfigError("output.formats", "expected an array");
            c.formats.clear();
            for (std::size_t i = 0; i < v->size(); ++i) {
                const std::string where = "output.formats[" + std::to_string(i) + "]";
                const std::string fm = (*v)[i].is_string() ? (*v)[i].get<std::string>() : "";
                if (fm != "csv" && fm != "vtk") throw ConfigError(where, "expected csv or vtk");
                c.formats.push_back(fm);
            }
        }
        if (const Json* v = child(*o, "path")) {
            if (!v->is_string() || v->get<std::string>().empty()) throw ConfigError("output.path", "expected a path");
            c.output_path = v->get<std::string>();
        }
    }

    if (const Json* v = child(doc, "seed")) c.seed = count(*v, "seed");

    if (const Json* m = child(doc, "manufactured")) {
        if (!m->is_object()) throw ConfigError("manufactured", "expected an object");
        reject_unknown(*m, "manufactured", {"q"});
        const Json* q = child(*m, "q");
        if (!q) throw ConfigError("manufactured.q", "missing");
        c.manufactured_q = expression(*q, "manufactured.q");
    }

    if (const Json* r = child(doc, "report")) {
        if (!r->is_object()) throw ConfigError("report", "expected an object");
        reject_unknown(*r, "report", {"samples"});
        if (const Json* v = child(*r, "samples")) c.report_samples = count(*v, "report.samples");
    }

    if (const Json* s = child(doc, "sweep")) {
        if (!s->is_object()) throw ConfigError("sweep", "expected an object");
        reject_unknown(*s, "sweep", {"h"});
        if (const Json* v = child(*s, "h")) {
            c.sweep_h = number(*v, "sweep.h");
            if (!(*c.sweep_h > 0.0)) throw ConfigError("sweep.h", "must be positive");
        }
    }
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("<file>", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    Json doc;
    try {
        doc = Json::parse(ss.str());
    } catch (const Json::parse_error& e) {
        throw ConfigError("<file>", std::string("invalid JSON in '") + path + "': " + e.what());
    }
    return parse_config(doc);
}

/// Geometry and forces as evaluable objects.
inline FilmGeometry make_geometry(const RunConfig& c) {
    PlanarScalar h;
    if (c.height.expression.empty()) {
        h = height::bilinear_grid(c.domain, c.height.grid_nx, c.height.grid_ny, c.height.grid_values);
    } else {
        h = Expression::parse(c.height.expression);
    }
    return FilmGeometry(c.domain, std::move(h), c.h_min, c.h_max);
}

inline BodyForces make_forces(const RunConfig& c) {
    const auto vec = [](const std::array<std::string, 2>& e) -> PlanarVector {
        const Expression ex = Expression::parse(e[0]), ey = Expression::parse(e[1]);
        return [ex, ey](double x, double y) { return Vec2{ex(x, y), ey(x, y)}; };
    };
    return {vec(c.f), vec(c.g)};
}

} // namespace micro_reynolds

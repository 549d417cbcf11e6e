// Command-line front end: solve, verify, sweep.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "micro_reynolds/micro_reynolds.hpp"

namespace mr = micro_reynolds;

namespace {

void print_error(const mr::Json& error) { std::cerr << mr::Json{{"error", error}}.dump() << '\n'; }

int cmd_solve(const std::string& config) {
    const auto r = mr::run_solve(config);
    if (r.status != mr::kExitOk) {
        print_error(r.manifest.value("error", mr::Json::object()));
    } else {
        std::cout << "manifest: " << r.manifest_path << '\n';
        for (const auto& p : r.manifest["outputs"]) std::cout << "output: " << p.get<std::string>() << '\n';
    }
    return r.status;
}

int cmd_verify(const std::string& level) {
    const auto results = mr::run_acceptance(level == "full" ? mr::VerifyLevel::Full : mr::VerifyLevel::Quick);
    bool ok = true;
    for (const auto& r : results) {
        std::cout << mr::format_result(r) << '\n';
        ok = ok && r.pass;
    }
    std::cout << (ok ? "all criteria passed" : "verification FAILED") << '\n';
    return ok ? mr::kExitOk : mr::kExitVerifyFailed;
}

int cmd_sweep(const std::string& config, const std::string& axis, const std::string& values) {
    const auto r = mr::run_sweep(config, axis, values);
    if (r.status != mr::kExitOk) print_error(r.error);
    else std::cout << "table: " << r.csv_path << '\n';
    return r.status;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Micropolar thin-film lubrication solver under Navier slip"};
    app.require_subcommand(1);

    std::string solve_config;
    auto* solve = app.add_subcommand("solve", "run the pressure pipeline for one configuration");
    solve->add_option("--config", solve_config, "JSON run configuration")->required();

    std::string level = "quick";
    auto* verify = app.add_subcommand("verify", "run the acceptance suite");
    verify->add_option("--level", level, "quick or full")->check(CLI::IsMember({"quick", "full"}));

    std::string sweep_config, axis, values;
    auto* sweep = app.add_subcommand("sweep", "tabulate probed mobilities along one parameter");
    sweep->add_option("--config", sweep_config, "JSON run configuration")->required();
    sweep->add_option("--axis", axis, "lambda, N, Rc or h")->required();
    sweep->add_option("--values", values, "comma-separated values")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? mr::kExitOk : mr::kExitConfig;
    }

    try {
        if (*solve) return cmd_solve(solve_config);
        if (*verify) return cmd_verify(level);
        return cmd_sweep(sweep_config, axis, values);
    } catch (const std::exception& e) {
        print_error(mr::error_json("cli", e));
        return mr::kExitRuntime;
    }
}

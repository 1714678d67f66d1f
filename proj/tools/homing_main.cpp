// Command-line front end: solve, solve-numeric, simulate, verify, sweep.
// Exit codes: 0 success, 1 verification failure, 2 infeasible or invalid
// input, 3 numeric failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "homing/cli.hpp"
#include "homing/json_io.hpp"

namespace {

struct FlagOverrides {
    std::optional<double> lambda;
    std::optional<double> terminal_cost;
    std::optional<double> d1;
    std::optional<double> d2;
};

void add_common_options(CLI::App* cmd, std::string& config_path, homing::cli::RunConfig& cfg,
                        FlagOverrides& ov) {
    const auto setter = [](std::optional<double>& slot) {
        return [&slot](const std::vector<std::string>& v) {
            try {
                slot = std::stod(v[0]);
            } catch (const std::exception&) {
                return false;
            }
            return true;
        };
    };
    cmd->add_option("--config", config_path, "problem JSON file")->required();
    cmd->add_option("--out", cfg.out_prefix, "output path prefix");
    cmd->add_option("--lambda", setter(ov.lambda), "override the running cost rate");
    cmd->add_option("--k0", setter(ov.terminal_cost), "override the terminal cost");
    cmd->add_option("--d1", setter(ov.d1), "override the left boundary");
    cmd->add_option("--d2", setter(ov.d2), "override the right boundary");
}

int load_problem(const std::string& config_path, const FlagOverrides& ov,
                 homing::cli::RunConfig& cfg) {
    std::ifstream is(config_path);
    if (!is) {
        std::cerr << "error: cannot open config file: " << config_path << "\n";
        return 2;
    }
    return homing::cli::guarded([&] {
        cfg.problem = homing::problem_from_json(homing::json::parse(is));
        if (ov.lambda) cfg.problem.lambda = *ov.lambda;
        if (ov.terminal_cost) cfg.problem.terminal_cost = *ov.terminal_cost;
        if (ov.d1) cfg.problem.d1 = *ov.d1;
        if (ov.d2) cfg.problem.d2 = *ov.d2;
        return 0;
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"closed-form and numeric solvers, with Monte Carlo verification, "
                 "for first-exit control of diffusions with control-dependent variance"};
    app.require_subcommand(1);

    homing::cli::RunConfig cfg;
    std::string config_path;
    FlagOverrides ov;

    auto* solve = app.add_subcommand("solve", "closed-form constants and value function");
    add_common_options(solve, config_path, cfg, ov);

    auto* solve_numeric =
        app.add_subcommand("solve-numeric", "shooting solution of the boundary-value equation");
    add_common_options(solve_numeric, config_path, cfg, ov);
    solve_numeric->add_option("--grid", cfg.grid_n, "integration steps")->check(CLI::PositiveNumber);
    solve_numeric->add_option("--tol", cfg.tol, "terminal-value tolerance");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo cost of a policy");
    add_common_options(simulate, config_path, cfg, ov);
    simulate->add_option("--policy", cfg.policy_spec,
                         "zero | constant:<u0> | optimal | scaled:<factor> | table:<csv>");
    simulate->add_option("--dt", cfg.dt, "Euler step");
    simulate->add_option("--paths", cfg.paths, "number of paths")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", cfg.seed, "base seed");
    simulate->add_option("--x0", cfg.x0, "start state (default: interval midpoint)");
    simulate->add_option("--max-time", cfg.max_time, "censoring horizon");
    simulate->add_option("--grid", cfg.grid_n, "integration steps for table-based optimal policy");
    simulate->add_option("--tol", cfg.tol, "tolerance for table-based optimal policy");
    simulate->add_option("--threads", cfg.threads, "worker threads (0 = auto; results identical)");
    simulate->add_flag("--dump-paths", cfg.dump_paths, "also write per-path outcomes CSV");
    simulate->add_flag("--allow-large-dt", cfg.allow_large_dt, "waive the dt sanity bound");

    auto* verify = app.add_subcommand(
        "verify", "closed-form / numeric / Monte Carlo cross-checks on one problem");
    add_common_options(verify, config_path, cfg, ov);
    verify->add_option("--grid", cfg.grid_n, "integration steps");
    verify->add_option("--tol", cfg.tol, "terminal-value tolerance");
    verify->add_option("--dt", cfg.dt, "Euler step");
    bool paths_given = false;
    verify->add_option("--paths", cfg.paths, "paths per Monte Carlo check")
        ->check(CLI::PositiveNumber)
        ->each([&paths_given](const std::string&) { paths_given = true; });
    verify->add_option("--seed", cfg.seed, "base seed");
    verify->add_option("--x0", cfg.x0, "evaluation state (default: interval midpoint)");
    verify->add_option("--threads", cfg.threads, "worker threads");

    auto* sweep = app.add_subcommand("sweep", "parameter sweep with feasibility report");
    add_common_options(sweep, config_path, cfg, ov);
    sweep->add_option("--sweep", cfg.sweep_spec, "var:lo:hi:step over lambda | terminal_cost | d2")
        ->required();
    sweep->add_option("--x0", cfg.x0, "evaluation state for F and u*");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (const int rc = load_problem(config_path, ov, cfg); rc != 0) return rc;

    if (solve->parsed()) return homing::cli::cmd_solve(cfg);
    if (solve_numeric->parsed()) return homing::cli::cmd_solve_numeric(cfg);
    if (simulate->parsed()) return homing::cli::cmd_simulate(cfg);
    if (verify->parsed()) {
        if (!paths_given) cfg.paths = 20000; // lighter default for the check battery
        return homing::cli::cmd_verify(cfg);
    }
    if (sweep->parsed()) return homing::cli::cmd_sweep(cfg);
    return 2;
}

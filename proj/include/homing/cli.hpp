#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "homing/closed_form.hpp"
#include "homing/errors.hpp"
#include "homing/hjb_numeric.hpp"
#include "homing/json_io.hpp"
#include "homing/policy.hpp"
#include "homing/problem.hpp"
#include "homing/simulate.hpp"

namespace homing::cli {

/// Fully resolved run configuration; every command echoes it (defaults
/// included) into a <out>_config.json sidecar so any artifact can be
/// reproduced byte-for-byte from the sidecar alone.
struct RunConfig {
    HomingProblem problem;
    std::string out_prefix = "run";
    // solve-numeric / optimal-policy resolution
    int grid_n = 10000;
    double tol = 1e-8;
    // simulate
    double dt = 1e-4;
    std::int64_t paths = 100000;
    std::uint64_t seed = 42;
    double x0 = std::numeric_limits<double>::quiet_NaN(); // NaN -> midpoint
    double max_time = 0.0;                                // <= 0 -> default horizon
    std::string policy_spec = "optimal";
    bool dump_paths = false;
    bool allow_large_dt = false;
    int threads = 0; // 0 -> hardware concurrency; never affects results
    // sweep
    std::string sweep_spec;

    double resolved_x0() const {
        return std::isnan(x0) ? 0.5 * (problem.d1 + problem.d2) : x0;
    }
};

inline std::string describe(const CaseTag& tag) {
    std::ostringstream os;
    switch (tag.kind) {
        case CaseKind::both:
            os << "both(n=" << tag.n << ", h0=" << format_number(tag.h0) << ", m=" << tag.m
               << ", g0=" << format_number(tag.g0) << ")";
            break;
        case CaseKind::case1:
            os << "case1(n=" << tag.n << ", h0=" << format_number(tag.h0) << ")";
            break;
        case CaseKind::case2:
            os << "case2(m=" << tag.m << ", g0=" << format_number(tag.g0) << ")";
            break;
        default:
            os << "neither";
    }
    return os.str();
}

namespace detail {

inline void write_text_file(const std::string& path, const std::string& content) {
    const std::filesystem::path fp(path);
    if (fp.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(fp.parent_path(), ec);
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DomainError("cannot open output file: " + path);
    os << content;
}

inline void write_sidecar(const RunConfig& cfg, const std::string& command) {
    json j{{"command", command},
           {"problem", to_json(cfg.problem)},
           {"options",
            json{{"out", cfg.out_prefix},
                 {"grid", cfg.grid_n},
                 {"tol", cfg.tol},
                 {"dt", cfg.dt},
                 {"paths", cfg.paths},
                 {"seed", cfg.seed},
                 {"x0", cfg.resolved_x0()},
                 {"max_time", resolved_max_time(cfg.problem, SimulationConfig{
                                                                 cfg.dt, cfg.paths, cfg.seed,
                                                                 cfg.max_time, cfg.resolved_x0(),
                                                                 cfg.allow_large_dt})},
                 {"policy", cfg.policy_spec},
                 {"dump_paths", cfg.dump_paths},
                 {"allow_large_dt", cfg.allow_large_dt},
                 {"threads", cfg.threads},
                 {"sweep", cfg.sweep_spec}}}};
    write_text_file(cfg.out_prefix + "_config.json", j.dump(2) + "\n");
}

inline CaseChoice preferred_case(const CaseTag& tag) {
    if (tag.has_case1()) return CaseChoice::case1;
    if (tag.has_case2()) return CaseChoice::case2;
    throw CaseError("problem is in neither solvable case; use solve-numeric");
}

/// Minimal admissible terminal cost: the reference-shape formula when the
/// problem matches one, otherwise bisection.
inline double min_k0_for(const HomingProblem& p, const CaseTag& tag) {
    try {
        return min_k0_closed(p);
    } catch (const ShapeError&) {
        return min_k0_numeric(p, preferred_case(tag));
    }
}

} // namespace detail

/// Map exceptions to the process exit contract: 2 for infeasible or
/// otherwise invalid input, 3 for numeric failures. (Exit 1 is reserved
/// for verification failures, which are not exceptions.)
template <class Fn>
int guarded(Fn&& fn, std::ostream& err = std::cerr) {
    try {
        return fn();
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
    } catch (const CaseError& e) {
        err << "error: " << e.what() << "\n";
    } catch (const ShapeError& e) {
        err << "error: " << e.what() << "\n";
    } catch (const InfeasibleError& e) {
        err << "error: " << e.what() << "\n";
    } catch (const AdmissibilityError& e) {
        err << "error: " << e.what() << "\n";
    } catch (const json::exception& e) {
        err << "error: bad JSON input: " << e.what() << "\n";
        return 2;
    } catch (const HomingError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

inline int cmd_solve(const RunConfig& cfg, std::ostream& out = std::cout) {
    return guarded([&] {
        detail::write_sidecar(cfg, "solve");
        const HomingProblem& p = cfg.problem;
        validate_problem(p);
        const CaseTag tag = classify(p);
        const CaseChoice choice = detail::preferred_case(tag);
        const ClosedFormSolution sol = solve_constants(p, choice);
        for (const auto& w : sol.warnings) out << "warning: " << w << "\n";

        detail::write_text_file(cfg.out_prefix + "_solution.json", to_json(sol).dump(2) + "\n");
        std::ostringstream csv;
        write_value_table(csv, p, sol, 1001);
        detail::write_text_file(cfg.out_prefix + "_value.csv", csv.str());

        const double min_k0 = detail::min_k0_for(p, tag);
        out << "case: " << describe(tag) << " (used " << to_string(choice) << ")\n";
        out << "branch: " << to_string(sol.branch) << "\n";
        out << "c: " << format_number(sol.c) << "\n";
        out << "c1: " << format_number(sol.c1) << "\n";
        out << "c0: " << format_number(sol.c0) << "\n";
        out << "K0 admissibility margin: " << format_number(p.terminal_cost - min_k0)
            << " (minimal admissible K0 = " << format_number(min_k0) << ")\n";
        return 0;
    });
}

// ---------------------------------------------------------------------------
// solve-numeric
// ---------------------------------------------------------------------------

inline int cmd_solve_numeric(const RunConfig& cfg, std::ostream& out = std::cout) {
    return guarded([&] {
        detail::write_sidecar(cfg, "solve-numeric");
        const HomingProblem& p = cfg.problem;
        const NumericValueFunction nvf = solve_bvp(p, cfg.grid_n, cfg.tol);

        std::ostringstream csv;
        write_numeric_table(csv, p, nvf);
        detail::write_text_file(cfg.out_prefix + "_numeric.csv", csv.str());

        out << "s_star: " << format_number(nvf.shoot_parameter) << "\n";
        out << "residual_sup: " << format_number(nvf.residual_sup) << "\n";
        const CaseTag tag = classify(p);
        if (tag.solvable()) {
            const ClosedFormSolution sol = solve_constants(p, detail::preferred_case(tag));
            double gap = 0.0;
            for (std::size_t i = 0; i < nvf.grid.size(); ++i)
                gap = std::max(gap, std::abs(nvf.F_values[i] - eval_F(sol, nvf.grid[i])));
            out << "closed_form_gap_sup: " << format_number(gap) << "\n";
        }
        return 0;
    });
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

/// Resolve a policy specification: zero | constant:<u0> | optimal |
/// scaled:<factor> (around the optimal policy) | table:<csv path>.
inline Policy resolve_policy(const HomingProblem& p, const std::string& spec, int grid_n,
                             double tol) {
    const auto split = spec.find(':');
    const std::string head = spec.substr(0, split);
    const std::string arg = split == std::string::npos ? "" : spec.substr(split + 1);
    if (head == "zero") return Policy::zero(p);
    if (head == "constant") {
        if (arg.empty()) throw DomainError("constant policy needs a value: constant:<u0>");
        return Policy::constant(p, std::stod(arg));
    }
    if (head == "table") {
        if (arg.empty()) throw DomainError("table policy needs a path: table:<csv>");
        std::ifstream is(arg);
        if (!is) throw DomainError("cannot open policy table: " + arg);
        return policy_from_csv(is);
    }
    if (head == "optimal" || head == "scaled") {
        validate_problem(p);
        const CaseTag tag = classify(p);
        Policy opt = tag.solvable()
                         ? Policy::optimal(p, solve_constants(p, detail::preferred_case(tag)))
                         : extract_policy(solve_bvp(p, grid_n, tol), p);
        if (head == "optimal") return opt;
        if (arg.empty()) throw DomainError("scaled policy needs a factor: scaled:<factor>");
        return Policy::scaled(std::move(opt), std::stod(arg));
    }
    throw DomainError("unknown policy spec: " + spec);
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out = std::cout) {
    return guarded([&] {
        detail::write_sidecar(cfg, "simulate");
        const HomingProblem& p = cfg.problem;
        const Policy pol = resolve_policy(p, cfg.policy_spec, cfg.grid_n, cfg.tol);
        const SimulationConfig sim{cfg.dt,      cfg.paths,         cfg.seed,
                                   cfg.max_time, cfg.resolved_x0(), cfg.allow_large_dt};

        const std::vector<PathOutcome> outcomes = run_paths(p, pol, sim, cfg.threads);
        const McEstimate est = homing::detail::aggregate(outcomes);
        if (cfg.dump_paths) {
            std::ostringstream csv;
            write_paths_csv(csv, outcomes);
            detail::write_text_file(cfg.out_prefix + "_paths.csv", csv.str());
        }
        if (est.censored_fraction > 0.01) {
            std::ostringstream os;
            os << 100.0 * est.censored_fraction << "% of paths were censored; raise max_time";
            throw CensoringError(os.str());
        }
        detail::write_text_file(cfg.out_prefix + "_mc.json", to_json(est).dump(2) + "\n");

        out << "mean_cost: " << format_number(est.mean_cost) << " +- "
            << format_number(est.std_error) << "\n";
        out << "exit fractions: left " << format_number(est.exit_left_fraction) << ", right "
            << format_number(est.exit_right_fraction) << ", censored "
            << format_number(est.censored_fraction) << "\n";
        out << "mean_exit_time: " << format_number(est.mean_exit_time) << "\n";
        return 0;
    });
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Closed-form consistency checks (boundary exactness, equation residual,
/// control sign, feasibility) for a given solution; split out so a
/// corrupted solution can be diagnosed directly.
inline std::vector<VerifyCheck> verify_closed_form(const HomingProblem& p,
                                                   const ClosedFormSolution& sol,
                                                   int grid_points = 1001) {
    std::vector<VerifyCheck> checks;
    const double scale = std::max(1.0, p.terminal_cost);
    const double b1 = std::abs(eval_F(sol, p.d1));
    const double b2 = std::abs(eval_F(sol, p.d2) - p.terminal_cost);
    checks.push_back({"boundary_exactness", b1 <= 1e-9 * scale && b2 <= 1e-9 * scale,
                      "|F(d1)| = " + format_number(b1) + ", |F(d2)-K0| = " + format_number(b2)});

    const double step = (p.d2 - p.d1) / (grid_points - 1);
    double res_sup = 0.0;
    for (int i = 1; i < grid_points - 1; ++i)
        res_sup = std::max(res_sup, std::abs(hjb_residual(p, sol, p.d1 + i * step)));
    checks.push_back({"ode_residual", res_sup <= 1e-9, "sup = " + format_number(res_sup)});

    bool signs = true;
    double worst_g = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_points; ++i) {
        const double x = (i == grid_points - 1) ? p.d2 : p.d1 + i * step;
        const double g = eval_G(sol, x);
        worst_g = std::max(worst_g, g);
        if (!(g < 0.0) || !(optimal_control(p, sol, x) >= 0.0)) signs = false;
    }
    checks.push_back({"control_sign", signs, "max G = " + format_number(worst_g)});

    double worst_feas = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid_points; ++i) {
        const double x = (i == grid_points - 1) ? p.d2 : p.d1 + i * step;
        worst_feas = std::min(worst_feas, p.lambda + p.f(x) * eval_F_prime(sol, x));
    }
    checks.push_back({"feasibility", worst_feas >= -1e-12,
                      "min lambda + f F' = " + format_number(worst_feas)});
    return checks;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out = std::cout) {
    return guarded([&]() -> int {
        detail::write_sidecar(cfg, "verify");
        const HomingProblem& p = cfg.problem;
        validate_problem(p);
        const CaseTag tag = classify(p);
        if (!tag.solvable())
            throw CaseError("verify needs a problem in Case 1 or Case 2");
        const CaseChoice choice = detail::preferred_case(tag);
        const ClosedFormSolution sol = solve_constants(p, choice);

        std::vector<VerifyCheck> checks = verify_closed_form(p, sol);

        if (tag.kind == CaseKind::both) {
            const ClosedFormSolution s1 = solve_constants(p, CaseChoice::case1);
            const ClosedFormSolution s2 = solve_constants(p, CaseChoice::case2);
            double gap = 0.0;
            const double step = (p.d2 - p.d1) / 1000.0;
            for (int i = 0; i <= 1000; ++i) {
                const double x = (i == 1000) ? p.d2 : p.d1 + i * step;
                gap = std::max(gap, std::abs(eval_F(s1, x) - eval_F(s2, x)));
            }
            checks.push_back({"case_agreement", gap <= 1e-9, "sup gap = " + format_number(gap)});
        } else {
            checks.push_back({"case_agreement", true, "single case, nothing to compare"});
        }

        const NumericValueFunction nvf = solve_bvp(p, cfg.grid_n, cfg.tol);
        double oracle_gap = 0.0;
        for (std::size_t i = 0; i < nvf.grid.size(); ++i)
            oracle_gap = std::max(oracle_gap, std::abs(nvf.F_values[i] - eval_F(sol, nvf.grid[i])));
        const double s_gap = std::abs(nvf.shoot_parameter - eval_F_prime(sol, p.d1));
        checks.push_back({"numeric_oracle_gap", oracle_gap <= 1e-6 && s_gap <= 1e-6,
                          "sup gap = " + format_number(oracle_gap) +
                              ", slope gap = " + format_number(s_gap)});
        checks.push_back({"numeric_residual", nvf.residual_sup <= 1e-4,
                          "sup = " + format_number(nvf.residual_sup)});

        const double x0 = cfg.resolved_x0();
        const double target = eval_F(sol, x0);
        const SimulationConfig sim{cfg.dt,      cfg.paths, cfg.seed,
                                   cfg.max_time, x0,        cfg.allow_large_dt};
        const Policy optimal_policy = Policy::optimal(p, sol);
        const McEstimate opt = estimate_cost(p, optimal_policy, sim, cfg.threads);
        const double mc_gap = std::abs(opt.mean_cost - target);
        const double mc_tol = 3.0 * opt.std_error + 0.01;
        checks.push_back({"mc_optimal_match", mc_gap <= mc_tol,
                          "|mean - F(x0)| = " + format_number(mc_gap) +
                              " vs 3 SE + 0.01 = " + format_number(mc_tol)});

        bool dominance = true;
        std::ostringstream dominance_detail;
        const std::vector<std::pair<std::string, Policy>> rivals = {
            {"zero", Policy::zero(p)},
            {"constant:1", Policy::constant(p, 1.0)},
            {"scaled:0.5", Policy::scaled(optimal_policy, 0.5)},
            {"scaled:2", Policy::scaled(optimal_policy, 2.0)}};
        for (const auto& [name, rival] : rivals) {
            const McEstimate est = estimate_cost(p, rival, sim, cfg.threads);
            const double slack = est.mean_cost - (target - 3.0 * est.std_error - 0.01);
            if (slack < 0.0) dominance = false;
            dominance_detail << name << " slack " << format_number(slack) << "; ";
        }
        checks.push_back({"policy_dominance", dominance, dominance_detail.str()});

        bool all_pass = true;
        json report = json::array();
        for (const auto& c : checks) {
            all_pass = all_pass && c.pass;
            out << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
            report.push_back(json{{"check", c.name}, {"pass", c.pass}, {"detail", c.detail}});
        }
        detail::write_text_file(cfg.out_prefix + "_verify.json",
                        json{{"all_pass", all_pass}, {"checks", report}}.dump(2) + "\n");
        out << (all_pass ? "all checks passed\n" : "verification failed\n");
        return all_pass ? 0 : 1;
    });
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepSpec {
    std::string variable; // lambda | terminal_cost | d2
    double lo = 0.0;
    double hi = 0.0;
    double step = 0.0;
};

inline SweepSpec parse_sweep_spec(const std::string& spec) {
    SweepSpec s;
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t colon = spec.find(':', start);
        parts.push_back(spec.substr(start, colon - start));
        if (colon == std::string::npos) break;
        start = colon + 1;
    }
    if (parts.size() != 4) throw DomainError("sweep spec must be var:lo:hi:step");
    s.variable = parts[0];
    if (s.variable != "lambda" && s.variable != "terminal_cost" && s.variable != "d2")
        throw DomainError("sweep variable must be lambda, terminal_cost or d2");
    try {
        s.lo = std::stod(parts[1]);
        s.hi = std::stod(parts[2]);
        s.step = std::stod(parts[3]);
    } catch (const std::exception&) {
        throw DomainError("sweep spec must be var:lo:hi:step with numeric bounds");
    }
    if (!(s.step > 0.0) || !(s.hi >= s.lo)) throw DomainError("sweep needs hi >= lo and step > 0");
    return s;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out = std::cout) {
    return guarded([&] {
        detail::write_sidecar(cfg, "sweep");
        const SweepSpec spec = parse_sweep_spec(cfg.sweep_spec);

        std::ostringstream csv;
        csv << "value,feasible,c,F_x0,u_star_x0,min_k0\n";
        const int count = static_cast<int>(std::floor((spec.hi - spec.lo) / spec.step + 1e-9)) + 1;
        for (int i = 0; i < count; ++i) {
            const double value = spec.lo + i * spec.step;
            HomingProblem p = cfg.problem;
            if (spec.variable == "lambda") p.lambda = value;
            else if (spec.variable == "terminal_cost") p.terminal_cost = value;
            else p.d2 = value;

            std::string c = "nan";
            std::string f_x0 = "nan";
            std::string u_x0 = "nan";
            std::string min_k0 = "nan";
            bool feasible = false;
            try {
                validate_problem(p);
                const CaseTag tag = classify(p);
                try {
                    min_k0 = format_number(detail::min_k0_for(p, tag));
                } catch (const HomingError&) {
                    // leave as nan: not classifiable or bound not found
                }
                const ClosedFormSolution sol = solve_constants(p, detail::preferred_case(tag));
                const double x0 = std::isnan(cfg.x0) ? 0.5 * (p.d1 + p.d2) : cfg.x0;
                feasible = true;
                c = format_number(sol.c);
                f_x0 = format_number(eval_F(sol, x0));
                u_x0 = format_number(optimal_control(p, sol, x0));
            } catch (const HomingError&) {
                feasible = false; // recorded as an infeasible row, not an abort
            }
            csv << format_number(value) << ',' << (feasible ? "true" : "false") << ',' << c << ','
                << f_x0 << ',' << u_x0 << ',' << min_k0 << '\n';
        }
        detail::write_text_file(cfg.out_prefix + "_sweep.csv", csv.str());
        out << "wrote " << cfg.out_prefix + "_sweep.csv" << " (" << count << " rows)\n";
        return 0;
    });
}

} // namespace homing::cli

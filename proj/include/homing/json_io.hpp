#pragma once

#include <charconv>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "homing/closed_form.hpp"
#include "homing/errors.hpp"
#include "homing/hjb_numeric.hpp"
#include "homing/policy.hpp"
#include "homing/problem.hpp"
#include "homing/simulate.hpp"

namespace homing {

using nlohmann::json;

/// Locale-independent decimal formatting at 15 significant digits — the
/// CSV number contract.
inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 15);
    if (res.ec != std::errc{}) return "nan";
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Problems
// ---------------------------------------------------------------------------

inline json to_json(const PowerLaw& pl) {
    return json{{"coefficient", pl.coefficient}, {"exponent", pl.exponent}};
}

inline PowerLaw power_law_from_json(const json& j) {
    if (!j.is_object() || !j.contains("coefficient") || !j.contains("exponent"))
        throw DomainError("power law JSON needs {coefficient, exponent}");
    PowerLaw pl;
    pl.coefficient = j.at("coefficient").get<double>();
    pl.exponent = j.at("exponent").get<int>();
    return pl;
}

inline json to_json(const HomingProblem& p) {
    return json{{"drift", to_json(p.drift)},
                {"variance", to_json(p.variance)},
                {"cost_weight", to_json(p.cost_weight)},
                {"lambda", p.lambda},
                {"terminal_cost", p.terminal_cost},
                {"d1", p.d1},
                {"d2", p.d2}};
}

inline HomingProblem problem_from_json(const json& j) {
    for (const char* key : {"drift", "variance", "cost_weight", "lambda",
                            "terminal_cost", "d1", "d2"})
        if (!j.contains(key)) throw DomainError(std::string("problem JSON missing key: ") + key);
    HomingProblem p;
    p.drift = power_law_from_json(j.at("drift"));
    p.variance = power_law_from_json(j.at("variance"));
    p.cost_weight = power_law_from_json(j.at("cost_weight"));
    p.lambda = j.at("lambda").get<double>();
    p.terminal_cost = j.at("terminal_cost").get<double>();
    p.d1 = j.at("d1").get<double>();
    p.d2 = j.at("d2").get<double>();
    return p;
}

// ---------------------------------------------------------------------------
// Closed-form solutions
// ---------------------------------------------------------------------------

inline std::string branch_kind_name(BranchKind k) {
    switch (k) {
        case BranchKind::log2: return "log2";
        case BranchKind::log3: return "log3";
        case BranchKind::log4: return "log4";
        default: return "generic";
    }
}

inline json to_json(const ClosedFormSolution& s) {
    return json{{"case", to_string(s.used_case)},
                {"branch", json{{"kind", branch_kind_name(s.branch.kind)}, {"e", s.branch.e}}},
                {"c", s.c},
                {"c1", s.c1},
                {"c0", s.c0},
                {"effective_f0", s.effective_f0},
                {"effective_h0", s.effective_h0},
                {"effective_lambda", s.effective_lambda}};
}

/// Rebind an exported solution to its problem (the JSON form carries the
/// constants only; the evaluation domain comes from the problem).
inline ClosedFormSolution solution_from_json(const json& j, const HomingProblem& p) {
    ClosedFormSolution s;
    const std::string case_name = j.at("case").get<std::string>();
    if (case_name == "case1") s.used_case = CaseChoice::case1;
    else if (case_name == "case2") s.used_case = CaseChoice::case2;
    else throw DomainError("solution JSON: case must be case1 or case2");
    s.branch = Branch::for_exponent(j.at("branch").at("e").get<int>());
    s.c = j.at("c").get<double>();
    s.c1 = j.at("c1").get<double>();
    s.c0 = j.at("c0").get<double>();
    s.effective_f0 = j.at("effective_f0").get<double>();
    s.effective_h0 = j.at("effective_h0").get<double>();
    s.effective_lambda = j.at("effective_lambda").get<double>();
    s.d1 = p.d1;
    s.d2 = p.d2;
    s.terminal_cost = p.terminal_cost;
    return s;
}

// ---------------------------------------------------------------------------
// Policies (tagged unions)
// ---------------------------------------------------------------------------

inline json to_json(const Policy& pol) {
    return std::visit(
        [&](const auto& k) -> json {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Policy::ClosedFormOptimal>) {
                return json{{"kind", "closed_form_optimal"}, {"solution", to_json(k.solution)}};
            } else if constexpr (std::is_same_v<T, Policy::Tabulated>) {
                return json{{"kind", "tabulated"}, {"grid", k.grid}, {"values", k.values}};
            } else if constexpr (std::is_same_v<T, Policy::Constant>) {
                return json{{"kind", "constant"}, {"u0", k.u0}};
            } else if constexpr (std::is_same_v<T, Policy::Scaled>) {
                return json{{"kind", "scaled"}, {"factor", k.factor}, {"base", to_json(*k.base)}};
            } else {
                return json{{"kind", "zero"}};
            }
        },
        pol.storage());
}

inline Policy policy_from_json(const json& j, const HomingProblem& p) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "zero") return Policy::zero(p);
    if (kind == "constant") return Policy::constant(p, j.at("u0").get<double>());
    if (kind == "scaled")
        return Policy::scaled(policy_from_json(j.at("base"), p), j.at("factor").get<double>());
    if (kind == "tabulated")
        return Policy::tabulated(j.at("grid").get<std::vector<double>>(),
                                 j.at("values").get<std::vector<double>>());
    if (kind == "closed_form_optimal")
        return Policy::optimal(p, solution_from_json(j.at("solution"), p));
    throw DomainError("unknown policy kind: " + kind);
}

// ---------------------------------------------------------------------------
// Monte Carlo estimates
// ---------------------------------------------------------------------------

inline json to_json(const McEstimate& e) {
    return json{{"mean_cost", e.mean_cost},
                {"std_error", e.std_error},
                {"n_paths", e.n_paths},
                {"exit_left_fraction", e.exit_left_fraction},
                {"exit_right_fraction", e.exit_right_fraction},
                {"censored_fraction", e.censored_fraction},
                {"mean_exit_time", e.mean_exit_time},
                {"mean_running_cost", e.mean_running_cost}};
}

// ---------------------------------------------------------------------------
// CSV tables
// ---------------------------------------------------------------------------

/// Closed-form value function table on a uniform grid.
inline void write_value_table(std::ostream& os, const HomingProblem& p,
                              const ClosedFormSolution& s, int points) {
    os << "x,F,F_prime,G,u_star\n";
    const double step = (p.d2 - p.d1) / (points - 1);
    for (int i = 0; i < points; ++i) {
        const double x = (i == points - 1) ? p.d2 : p.d1 + i * step;
        os << format_number(x) << ',' << format_number(eval_F(s, x)) << ','
           << format_number(eval_F_prime(s, x)) << ',' << format_number(eval_G(s, x)) << ','
           << format_number(optimal_control(p, s, x)) << '\n';
    }
}

/// Numeric value function table at the integrator grid.
inline void write_numeric_table(std::ostream& os, const HomingProblem& p,
                                const NumericValueFunction& nvf) {
    os << "x,F,F_prime,F_double_prime,u_star\n";
    for (std::size_t i = 0; i < nvf.grid.size(); ++i) {
        const double x = nvf.grid[i];
        const double arg = std::max(p.lambda + p.f(x) * nvf.F_prime_values[i], 0.0);
        const double fpp = -std::sqrt(arg / p.h(x));
        os << format_number(x) << ',' << format_number(nvf.F_values[i]) << ','
           << format_number(nvf.F_prime_values[i]) << ',' << format_number(fpp) << ','
           << format_number(-p.v(x) / (2.0 * p.q(x)) * fpp) << '\n';
    }
}

/// Per-path outcome table.
inline void write_paths_csv(std::ostream& os, const std::vector<PathOutcome>& outcomes) {
    os << "path_index,exit_side,exit_time,cost\n";
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const PathOutcome& o = outcomes[i];
        os << i << ',' << to_string(o.exit_side) << ',' << format_number(o.exit_time) << ','
           << format_number(o.cost) << '\n';
    }
}

/// Read a tabulated policy from CSV: either two columns (x, u) or the
/// numeric table above (x, ..., u_star in the last column).
inline Policy policy_from_csv(std::istream& is) {
    std::vector<double> xs;
    std::vector<double> us;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cells.size() < 2) throw DomainError("policy CSV needs at least two columns");
        try {
            xs.push_back(std::stod(cells.front()));
            us.push_back(std::stod(cells.back()));
        } catch (const std::exception&) {
            if (xs.empty()) continue; // header row
            throw DomainError("policy CSV: unparsable row: " + line);
        }
    }
    return Policy::tabulated(std::move(xs), std::move(us));
}

} // namespace homing

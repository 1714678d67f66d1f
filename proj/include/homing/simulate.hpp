#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "homing/errors.hpp"
#include "homing/policy.hpp"
#include "homing/problem.hpp"
#include "homing/rng.hpp"

namespace homing {

struct SimulationConfig {
    double dt = 1e-4;              // Euler step
    std::int64_t paths = 100000;   // independent paths
    std::uint64_t base_seed = 42;  // per-path streams derive from (seed, index)
    double max_time = 0.0;         // censoring horizon; <= 0 means "use default"
    double x0 = 0.0;               // start state in [d1, d2]
    bool allow_large_dt = false;   // override the dt <= (d2-d1)^2/100 guard
};

enum class ExitSide { left, right, censored };

inline std::string to_string(ExitSide s) {
    switch (s) {
        case ExitSide::left: return "left";
        case ExitSide::right: return "right";
        default: return "censored";
    }
}

/// Outcome of one simulated path. The realised cost decomposes exactly as
/// cost = running_cost + terminal contribution (K0 on right exit, else 0).
struct PathOutcome {
    ExitSide exit_side = ExitSide::censored;
    double exit_time = 0.0;
    double cost = 0.0;
    double running_cost = 0.0;
};

/// Monte Carlo estimate of the expected cost under a fixed policy; equals
/// the value function only under the optimal control. mean_exit_time
/// averages over all paths, counting censored paths at the horizon.
struct McEstimate {
    double mean_cost = 0.0;
    double std_error = 0.0;
    std::int64_t n_paths = 0;
    double exit_left_fraction = 0.0;
    double exit_right_fraction = 0.0;
    double censored_fraction = 0.0;
    double mean_exit_time = 0.0;
    double mean_running_cost = 0.0;
};

/// Censoring horizon used when the config does not set one:
/// 10^3 (d2-d1)^2 / min v, generous relative to expected exit times.
inline double default_max_time(const HomingProblem& p) {
    double min_v = p.v(p.d2);
    try {
        const double v1 = p.v(p.d1);
        if (v1 > 0.0) min_v = std::min(min_v, v1);
    } catch (const DomainError&) {
        // v has a pole at d1 = 0; the right endpoint bounds it instead.
    }
    const double span = p.d2 - p.d1;
    return 1e3 * span * span / min_v;
}

inline double resolved_max_time(const HomingProblem& p, const SimulationConfig& cfg) {
    return cfg.max_time > 0.0 ? cfg.max_time : default_max_time(p);
}

inline void validate_simulation_config(const HomingProblem& p, const SimulationConfig& cfg) {
    validate_problem(p);
    if (!(cfg.dt > 0.0)) throw DomainError("dt must be > 0");
    const double span = p.d2 - p.d1;
    if (!cfg.allow_large_dt && cfg.dt > span * span / 100.0)
        throw DomainError("dt exceeds (d2-d1)^2/100; pass allow_large_dt to override");
    if (cfg.paths <= 0) throw DomainError("paths must be positive");
    if (!(cfg.x0 >= p.d1 && cfg.x0 <= p.d2)) throw DomainError("x0 must lie in [d1, d2]");
    const double horizon = resolved_max_time(p, cfg);
    if (!(horizon > 0.0)) throw DomainError("max_time must be > 0");
    if (horizon / cfg.dt > 1e9)
        throw DomainError("max_time/dt exceeds 1e9 steps; shorten the horizon");
}

/// Simulate one path of dX = f(X) dt + sqrt(v(X) u) dW under the policy,
/// accruing (q(X) u^2 / 2 + lambda) dt per step taken, until the state
/// first steps across d1 or d2 (exit recorded at the clamped boundary) or
/// the censoring horizon is hit (no terminal cost then).
inline PathOutcome simulate_path(const HomingProblem& p, const Policy& pol,
                                 const SimulationConfig& cfg, std::int64_t path_index) {
    const double d1 = p.d1;
    const double d2 = p.d2;
    if (cfg.x0 <= d1) return {ExitSide::left, 0.0, 0.0, 0.0};
    if (cfg.x0 >= d2) return {ExitSide::right, 0.0, p.terminal_cost, 0.0};

    const double dt = cfg.dt;
    const double sqrt_dt = std::sqrt(dt);
    const double horizon = resolved_max_time(p, cfg);
    const auto max_steps = static_cast<std::int64_t>(std::floor(horizon / dt + 1e-9));

    NormalStream rng(cfg.base_seed, static_cast<std::uint64_t>(path_index));
    double x = cfg.x0;
    double running = 0.0;
    for (std::int64_t i = 0; i < max_steps; ++i) {
        const double u = pol(x);
        running += (0.5 * p.q(x) * u * u + p.lambda) * dt;
        x += p.f(x) * dt + std::sqrt(p.v(x) * u) * sqrt_dt * rng.next();
        if (!std::isfinite(x) || !std::isfinite(running)) {
            std::ostringstream os;
            os << (std::isfinite(running) ? "state" : "cost") << " became non-finite at step "
               << i << " of path " << path_index;
            throw NumericalError(os.str());
        }
        const double t = static_cast<double>(i + 1) * dt;
        if (x <= d1) return {ExitSide::left, t, running, running};
        if (x >= d2) return {ExitSide::right, t, running + p.terminal_cost, running};
    }
    const double t_end = static_cast<double>(max_steps) * dt;
    return {ExitSide::censored, t_end, running, running};
}

namespace detail {

inline McEstimate aggregate(const std::vector<PathOutcome>& outcomes) {
    McEstimate est;
    est.n_paths = static_cast<std::int64_t>(outcomes.size());
    std::int64_t left = 0;
    std::int64_t right = 0;
    std::int64_t censored = 0;
    double sum_cost = 0.0;
    double sum_running = 0.0;
    double sum_time = 0.0;
    for (const PathOutcome& o : outcomes) {
        sum_cost += o.cost;
        sum_running += o.running_cost;
        sum_time += o.exit_time;
        switch (o.exit_side) {
            case ExitSide::left: ++left; break;
            case ExitSide::right: ++right; break;
            default: ++censored; break;
        }
    }
    const double n = static_cast<double>(est.n_paths);
    est.mean_cost = sum_cost / n;
    est.mean_running_cost = sum_running / n;
    est.mean_exit_time = sum_time / n;
    est.exit_left_fraction = static_cast<double>(left) / n;
    est.exit_right_fraction = static_cast<double>(right) / n;
    est.censored_fraction = static_cast<double>(censored) / n;
    double ss = 0.0;
    for (const PathOutcome& o : outcomes) {
        const double d = o.cost - est.mean_cost;
        ss += d * d;
    }
    est.std_error = est.n_paths > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
    return est;
}

} // namespace detail

/// Run all paths and store their outcomes by path index. Threads split
/// the index range; results are identical for any thread count because
/// each path's noise stream depends only on (base_seed, path_index) and
/// the outcome slots are disjoint.
inline std::vector<PathOutcome> run_paths(const HomingProblem& p, const Policy& pol,
                                          const SimulationConfig& cfg, int n_threads = 0) {
    validate_simulation_config(p, cfg);
    std::vector<PathOutcome> outcomes(static_cast<std::size_t>(cfg.paths));
    unsigned threads = n_threads > 0 ? static_cast<unsigned>(n_threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.paths));

    if (threads <= 1) {
        for (std::int64_t i = 0; i < cfg.paths; ++i)
            outcomes[static_cast<std::size_t>(i)] = simulate_path(p, pol, cfg, i);
        return outcomes;
    }

    struct WorkerFailure {
        std::int64_t first_index;
        std::exception_ptr error;
    };
    std::vector<WorkerFailure> failures(threads, {-1, nullptr});
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::int64_t chunk = (cfg.paths + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::int64_t begin = static_cast<std::int64_t>(t) * chunk;
        const std::int64_t end = std::min<std::int64_t>(begin + chunk, cfg.paths);
        pool.emplace_back([&, t, begin, end] {
            for (std::int64_t i = begin; i < end; ++i) {
                try {
                    outcomes[static_cast<std::size_t>(i)] = simulate_path(p, pol, cfg, i);
                } catch (...) {
                    failures[t] = {i, std::current_exception()};
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    // Rethrow the failure with the smallest path index so the reported
    // error does not depend on the thread count.
    const WorkerFailure* worst = nullptr;
    for (const auto& f : failures)
        if (f.error && (!worst || f.first_index < worst->first_index)) worst = &f;
    if (worst) std::rethrow_exception(worst->error);
    return outcomes;
}

/// Estimate the expected cost of a policy. Aggregation runs in path-index
/// order over the stored outcomes, so the estimate is bit-reproducible
/// for fixed (problem, policy, config) at any parallelism level.
/// Throws CensoringError when more than 1% of paths hit the horizon.
inline McEstimate estimate_cost(const HomingProblem& p, const Policy& pol,
                                const SimulationConfig& cfg, int n_threads = 0) {
    const std::vector<PathOutcome> outcomes = run_paths(p, pol, cfg, n_threads);
    const McEstimate est = detail::aggregate(outcomes);
    if (est.censored_fraction > 0.01) {
        std::ostringstream os;
        os << 100.0 * est.censored_fraction << "% of paths were censored at max_time = "
           << resolved_max_time(p, cfg) << "; the estimate would be biased";
        throw CensoringError(os.str());
    }
    return est;
}

} // namespace homing

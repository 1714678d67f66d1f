#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>

#include "homing/rng.hpp"
#include "homing/simulate.hpp"
#include "test_support.hpp"

using namespace homing;
using namespace homing::test;

namespace {

bool estimates_identical(const McEstimate& a, const McEstimate& b) {
    return std::memcmp(&a.mean_cost, &b.mean_cost, sizeof(double)) == 0 &&
           std::memcmp(&a.std_error, &b.std_error, sizeof(double)) == 0 &&
           a.n_paths == b.n_paths && a.exit_left_fraction == b.exit_left_fraction &&
           a.exit_right_fraction == b.exit_right_fraction &&
           a.censored_fraction == b.censored_fraction &&
           std::memcmp(&a.mean_exit_time, &b.mean_exit_time, sizeof(double)) == 0 &&
           std::memcmp(&a.mean_running_cost, &b.mean_running_cost, sizeof(double)) == 0;
}

} // namespace

TEST_CASE("normal stream is deterministic per (seed, path)", "[simulate][rng]") {
    NormalStream a(42, 7);
    NormalStream b(42, 7);
    NormalStream c(42, 8);
    bool all_equal = true;
    bool any_differs = false;
    for (int i = 0; i < 1000; ++i) {
        const double x = a.next();
        all_equal = all_equal && (x == b.next());
        any_differs = any_differs || (x != c.next());
    }
    CHECK(all_equal);
    CHECK(any_differs);
}

TEST_CASE("normal stream moments look standard normal", "[simulate][rng]") {
    NormalStream s(123, 0);
    const int n = 1000000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = s.next();
        REQUIRE(std::isfinite(z));
        sum += z;
        sum_sq += z * z;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.004);    // ~4 sigma for n = 1e6
    CHECK(std::abs(var - 1.0) < 0.01);
}

TEST_CASE("paths started on a boundary are absorbed immediately", "[simulate]") {
    const HomingProblem p = wiener_problem();
    const Policy pol = Policy::zero(p);
    SimulationConfig cfg;
    cfg.x0 = p.d1;
    const PathOutcome left = simulate_path(p, pol, cfg, 0);
    CHECK(left.exit_side == ExitSide::left);
    CHECK(left.exit_time == 0.0);
    CHECK(left.cost == 0.0);

    cfg.x0 = p.d2;
    const PathOutcome right = simulate_path(p, pol, cfg, 0);
    CHECK(right.exit_side == ExitSide::right);
    CHECK(right.cost == p.terminal_cost);
}

TEST_CASE("zero policy on the Wiener fixture is a deterministic drift", "[simulate]") {
    const HomingProblem p = wiener_problem();
    const Policy pol = Policy::zero(p);
    SimulationConfig cfg;
    cfg.x0 = 0.5;
    cfg.dt = 1e-4;
    cfg.paths = 50;
    const std::vector<PathOutcome> outs = run_paths(p, pol, cfg, 2);
    for (const PathOutcome& o : outs) {
        REQUIRE(o.exit_side == ExitSide::right);
        REQUIRE(std::abs(o.exit_time - 0.5) <= cfg.dt + 1e-12);
        REQUIRE(o.cost == 1.0); // lambda = 0: running cost is exactly zero
    }
}

TEST_CASE("estimates are bit-identical across thread counts", "[simulate]") {
    const HomingProblem p = wiener_problem();
    const Policy pol = Policy::optimal(p, solve_constants(p));
    SimulationConfig cfg;
    cfg.x0 = 0.5;
    cfg.dt = 5e-4;
    cfg.paths = 3000;
    cfg.base_seed = 42;
    const McEstimate e1 = estimate_cost(p, pol, cfg, 1);
    const McEstimate e2 = estimate_cost(p, pol, cfg, 2);
    const McEstimate e3 = estimate_cost(p, pol, cfg, 3);
    CHECK(estimates_identical(e1, e2));
    CHECK(estimates_identical(e1, e3));
}

TEST_CASE("per-path cost decomposes into running plus terminal", "[simulate]") {
    const HomingProblem p = gbm_problem();
    const Policy pol = Policy::constant(p, 1.0);
    SimulationConfig cfg;
    cfg.x0 = 1.5;
    cfg.dt = 5e-4;
    cfg.paths = 500;
    cfg.base_seed = 9;
    const std::vector<PathOutcome> outs = run_paths(p, pol, cfg, 2);
    int rights = 0;
    for (const PathOutcome& o : outs) {
        const double terminal = o.exit_side == ExitSide::right ? p.terminal_cost : 0.0;
        REQUIRE(o.cost == o.running_cost + terminal);
        REQUIRE(std::isfinite(o.cost));
        REQUIRE(o.exit_time >= 0.0);
        rights += o.exit_side == ExitSide::right;
    }
    CHECK(rights > 0);
}

TEST_CASE("exit fractions sum to one", "[simulate]") {
    const HomingProblem p = wiener_problem();
    const Policy pol = Policy::optimal(p, solve_constants(p));
    SimulationConfig cfg;
    cfg.x0 = 0.25;
    cfg.dt = 5e-4;
    cfg.paths = 2000;
    const McEstimate e = estimate_cost(p, pol, cfg, 0);
    CHECK(e.exit_left_fraction + e.exit_right_fraction + e.censored_fraction ==
          Catch::Approx(1.0).margin(1e-12));
    CHECK(e.mean_exit_time > 0.0);
    CHECK(e.n_paths == 2000);
}

TEST_CASE("a too-short horizon trips the censoring guard", "[simulate]") {
    const HomingProblem p = wiener_problem();
    const Policy pol = Policy::zero(p);
    SimulationConfig cfg;
    cfg.x0 = 0.5;
    cfg.dt = 1e-4;
    cfg.paths = 100;
    cfg.max_time = 0.01; // drift travels 0.01, far from the boundary at 1
    const PathOutcome o = simulate_path(p, pol, cfg, 0);
    CHECK(o.exit_side == ExitSide::censored);
    CHECK(o.exit_time == Catch::Approx(0.01).margin(1e-12));
    CHECK(o.cost == 0.0); // censoring drops the terminal cost
    CHECK_THROWS_AS(estimate_cost(p, pol, cfg, 1), CensoringError);
}

TEST_CASE("config validation guards the step and the horizon", "[simulate]") {
    const HomingProblem p = wiener_problem();
    SimulationConfig cfg;
    cfg.x0 = 0.5;

    cfg.dt = 0.5; // > (d2-d1)^2/100
    CHECK_THROWS_AS(validate_simulation_config(p, cfg), DomainError);
    cfg.allow_large_dt = true;
    CHECK_NOTHROW(validate_simulation_config(p, cfg));

    cfg = SimulationConfig{};
    cfg.x0 = 1.5;
    CHECK_THROWS_AS(validate_simulation_config(p, cfg), DomainError);

    cfg = SimulationConfig{};
    cfg.x0 = 0.5;
    cfg.paths = 0;
    CHECK_THROWS_AS(validate_simulation_config(p, cfg), DomainError);

    cfg = SimulationConfig{};
    cfg.x0 = 0.5;
    cfg.dt = 1e-8;
    cfg.max_time = 100.0; // 1e10 steps
    CHECK_THROWS_AS(validate_simulation_config(p, cfg), DomainError);

    CHECK(default_max_time(p) == Catch::Approx(1000.0).epsilon(1e-15));
}

TEST_CASE("non-finite states raise NumericalError with the step index", "[simulate]") {
    const HomingProblem p = wiener_problem();
    const Policy pol = Policy::constant(p, 1e308);
    SimulationConfig cfg;
    cfg.x0 = 0.5;
    cfg.paths = 4;
    CHECK_THROWS_MATCHES(estimate_cost(p, pol, cfg, 2), NumericalError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("step 0")));
}

TEST_CASE("optimal-policy estimate lands near the value function", "[simulate]") {
    const HomingProblem p = wiener_problem();
    const ClosedFormSolution s = solve_constants(p);
    const Policy pol = Policy::optimal(p, s);
    SimulationConfig cfg;
    cfg.x0 = 0.5;
    cfg.dt = 2e-4;
    cfg.paths = 4000;
    cfg.base_seed = 1;
    const McEstimate e = estimate_cost(p, pol, cfg, 0);
    CHECK(std::abs(e.mean_cost - kWienerF05) <= 3.0 * e.std_error + 0.02);
    CHECK(e.censored_fraction == 0.0);
}

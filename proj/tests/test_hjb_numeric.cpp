#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "homing/hjb_numeric.hpp"
#include "test_support.hpp"

using namespace homing;
using namespace homing::test;

TEST_CASE("shooting from the exact slope reproduces the terminal cost", "[hjb_numeric]") {
    const HomingProblem p = wiener_problem();
    const ShotResult r = shoot(p, kWienerC1, 10000); // F'(d1) = c^2 for lambda = 0
    REQUIRE(r.valid);
    CHECK(r.terminal_F == Catch::Approx(1.0).margin(1e-8));
    CHECK(r.trajectory.grid.size() == 10001);
    CHECK(r.trajectory.F_values.front() == 0.0);
}

TEST_CASE("zero slope is a fixed point when lambda = 0", "[hjb_numeric]") {
    const ShotResult r = shoot(wiener_problem(), 0.0, 1000);
    REQUIRE(r.valid);
    CHECK(r.terminal_F == 0.0);
    CHECK(r.trajectory.F_prime_values.back() == 0.0);
}

TEST_CASE("a slope below -lambda/f is invalid from the start", "[hjb_numeric]") {
    HomingProblem p = wiener_problem();
    p.lambda = 1.0;
    const ShotResult r = shoot(p, -2.0, 1000);
    REQUIRE_FALSE(r.valid);
    CHECK(r.invalid_step == 0);
    CHECK(r.invalid_at_x == Catch::Approx(p.d1).margin(1e-15));
}

TEST_CASE("solve_bvp matches the closed forms", "[hjb_numeric]") {
    const HomingProblem wiener = wiener_problem();
    const NumericValueFunction nw = solve_bvp(wiener, 10000, 1e-8);
    CHECK(nw.shoot_parameter == Catch::Approx(kWienerC1).margin(1e-6));
    const ClosedFormSolution sw = solve_constants(wiener);
    double sup = 0.0;
    for (std::size_t i = 0; i < nw.grid.size(); ++i)
        sup = std::max(sup, std::abs(nw.F_values[i] - eval_F(sw, nw.grid[i])));
    CHECK(sup <= 1e-6);
    CHECK(nw.residual_sup <= 1e-4);

    const HomingProblem gbm = gbm_problem();
    const NumericValueFunction ng = solve_bvp(gbm, 10000, 1e-8);
    CHECK(ng.shoot_parameter == Catch::Approx(kGbmC1).margin(1e-6));
    const ClosedFormSolution sg = solve_constants(gbm);
    sup = 0.0;
    for (std::size_t i = 0; i < ng.grid.size(); ++i)
        sup = std::max(sup, std::abs(ng.F_values[i] - eval_F(sg, ng.grid[i])));
    CHECK(sup <= 1e-6);
    CHECK(ng.residual_sup <= 1e-4);
}

TEST_CASE("solve_bvp handles the Bessel-like drift", "[hjb_numeric]") {
    const NumericValueFunction n = solve_bvp(bessel_problem(), 10000, 1e-8);
    CHECK(n.residual_sup <= 1e-4);
    CHECK(n.shoot_parameter == Catch::Approx(kBesselSlope).margin(1e-6));
    CHECK(std::abs(n.F_values.back() - 1.0) <= 1e-7);
}

TEST_CASE("solve_bvp covers problems outside both closed-form cases", "[hjb_numeric]") {
    const NumericValueFunction n = solve_bvp(neither_problem(), 10000, 1e-8);
    CHECK(n.shoot_parameter == Catch::Approx(kNeitherSlope).margin(1e-6));
    CHECK(n.residual_sup <= 1e-4);
}

TEST_CASE("negative lambda needs invalid-shot bracketing and still converges",
          "[hjb_numeric]") {
    HomingProblem p = wiener_problem();
    p.lambda = -1.0;
    p.terminal_cost = 2.0;
    const NumericValueFunction n = solve_bvp(p, 10000, 1e-10);
    // closed form: same c as the base fixture, F'(0) = c1 = c^2 + 1
    CHECK(n.shoot_parameter == Catch::Approx(kWienerC1 + 1.0).margin(1e-6));
    for (std::size_t i = 0; i < n.grid.size(); ++i)
        REQUIRE(p.lambda + p.f(n.grid[i]) * n.F_prime_values[i] >= 0.0);
}

TEST_CASE("terminal value is monotone in the slope", "[hjb_numeric]") {
    TestRng rng(511);
    const double neg_inf = -std::numeric_limits<double>::infinity();
    for (int trial = 0; trial < 40; ++trial) {
        HomingProblem p;
        p.drift = {rng.uniform(0.5, 2.0), rng.uniform_int(-1, 1)};
        p.variance = {rng.uniform(0.5, 2.0), rng.uniform_int(0, 2)};
        p.cost_weight = {rng.uniform(0.5, 2.0), rng.uniform_int(0, 2)};
        p.lambda = rng.uniform(0.0, 1.5);
        p.terminal_cost = 1.0;
        p.d1 = rng.uniform(0.4, 1.0);
        p.d2 = p.d1 + rng.uniform(0.4, 1.2);

        const double s1 = rng.uniform(0.0, 4.0);
        const double s2 = s1 + rng.uniform(0.0, 4.0);
        const auto terminal = [&](double s) {
            const ShotResult r = detail::integrate_shot<false>(p, s, 500);
            return r.valid ? r.terminal_F : neg_inf;
        };
        REQUIRE(terminal(s2) >= terminal(s1));
    }
}

TEST_CASE("refining the grid improves the recovered slope by at least 8x",
          "[hjb_numeric]") {
    // The GBM solution has a genuine truncation error (logarithmic F), so
    // the order of the scheme is measurable on it.
    const HomingProblem g = gbm_problem();
    const double g3 = std::abs(solve_bvp(g, 1000, 1e-15).shoot_parameter - kGbmC1);
    const double g4 = std::abs(solve_bvp(g, 10000, 1e-15).shoot_parameter - kGbmC1);
    CAPTURE(g3, g4);
    CHECK(g3 >= 8.0 * g4);
    const double g_half = std::abs(solve_bvp(g, 500, 1e-15).shoot_parameter - kGbmC1);
    CHECK(g_half >= 8.0 * g3); // ~16x per doubling: fourth order

    // The Wiener solution is a cubic polynomial, which the integrator
    // reproduces to machine accuracy already at N = 1e3; there is nothing
    // left for refinement to reduce there.
    const double w3 = std::abs(solve_bvp(wiener_problem(), 1000, 1e-15).shoot_parameter -
                               kWienerC1);
    CHECK(w3 <= 1e-12);

    // refinement direction alone, with the default tolerance
    const double coarse = std::abs(solve_bvp(g, 100, 1e-8).shoot_parameter - kGbmC1);
    CHECK(coarse >= g4);
}

TEST_CASE("extract_policy tabulates the optimal control", "[hjb_numeric]") {
    const HomingProblem wiener = wiener_problem();
    const NumericValueFunction nw = solve_bvp(wiener, 10000, 1e-8);
    const Policy pw = extract_policy(nw, wiener);
    const ClosedFormSolution sw = solve_constants(wiener);
    double sup = 0.0;
    for (int i = 0; i <= 500; ++i) {
        const double x = i / 500.0;
        sup = std::max(sup, std::abs(pw(x) - (-2.0 * (x + sw.c))));
    }
    CHECK(sup <= 1e-5);

    const HomingProblem gbm = gbm_problem();
    const Policy pg = extract_policy(solve_bvp(gbm, 10000, 1e-8), gbm);
    CHECK(pg(1.0) == Catch::Approx(2.58191011417364).margin(1e-5));
}

TEST_CASE("a forced-constant curvature yields the algebraic policy", "[hjb_numeric]") {
    const HomingProblem p = wiener_problem();
    const double kappa = 1.7;
    NumericValueFunction nvf;
    for (int i = 0; i <= 100; ++i) {
        const double x = i / 100.0;
        nvf.grid.push_back(x);
        nvf.F_values.push_back(0.0); // unused by the policy extraction
        // slope chosen so the integrator RHS equals exactly -kappa
        nvf.F_prime_values.push_back((kappa * kappa * p.h(x) - p.lambda) / p.f(x));
    }
    const Policy pol = extract_policy(nvf, p);
    for (int i = 0; i <= 100; ++i) {
        const double x = i / 100.0;
        REQUIRE(pol(x) == Catch::Approx(kappa * p.v(x) / (2.0 * p.q(x))).epsilon(1e-12));
    }
}

TEST_CASE("unreachable terminal cost raises BracketError", "[hjb_numeric]") {
    HomingProblem p = wiener_problem();
    p.terminal_cost = 1e300;
    try {
        solve_bvp(p, 200, 1e-8);
        FAIL("expected BracketError");
    } catch (const BracketError& e) {
        CHECK(std::isfinite(e.best_terminal()));
        CHECK(e.best_terminal() < 1e300);
    }
}

TEST_CASE("an infeasible slope range raises ShotInvalidError", "[hjb_numeric]") {
    HomingProblem p = wiener_problem();
    p.lambda = -1.0;
    p.drift.coefficient = 1e-20; // a valid slope would need s >= 1e20 > 2^60
    CHECK_THROWS_AS(solve_bvp(p, 200, 1e-8), ShotInvalidError);
}

TEST_CASE("solver preconditions are enforced", "[hjb_numeric]") {
    CHECK_THROWS_AS(solve_bvp(wiener_problem(), 50, 1e-8), DomainError);
    CHECK_THROWS_AS(solve_bvp(wiener_problem(), 1000, 0.0), DomainError);
    CHECK_THROWS_AS(shoot(wiener_problem(), 1.0, 10), DomainError);
}

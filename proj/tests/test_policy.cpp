#include <catch_amalgamated.hpp>

#include <cmath>

#include "homing/policy.hpp"
#include "test_support.hpp"

using namespace homing;
using namespace homing::test;

TEST_CASE("constant, zero and scaled policies evaluate as expected", "[policy]") {
    const HomingProblem p = wiener_problem();
    const Policy one = Policy::constant(p, 1.0);
    const Policy zero = Policy::zero(p);
    CHECK(one(0.1) == 1.0);
    CHECK(one(0.9) == 1.0);
    CHECK(zero(0.5) == 0.0);

    const ClosedFormSolution s = solve_constants(p);
    const Policy twice = Policy::scaled(Policy::optimal(p, s), 2.0);
    CHECK(twice(0.5) == Catch::Approx(3.8297084310253524).margin(1e-12));
}

TEST_CASE("optimal policy delegates to the closed-form control", "[policy]") {
    const HomingProblem p = wiener_problem();
    const ClosedFormSolution s = solve_constants(p);
    const Policy pol = Policy::optimal(p, s);
    TestRng rng(3);
    for (int i = 0; i < 100; ++i) {
        const double x = rng.uniform(0.0, 1.0);
        REQUIRE(pol(x) == -p.v(x) / (2.0 * p.q(x)) * eval_G(s, x));
    }
}

TEST_CASE("scaling by one is the identity", "[policy]") {
    const HomingProblem p = gbm_problem();
    const Policy base = Policy::optimal(p, solve_constants(p));
    const Policy same = Policy::scaled(base, 1.0);
    TestRng rng(4);
    for (int i = 0; i < 100; ++i) {
        const double x = rng.uniform(p.d1, p.d2);
        REQUIRE(same(x) == base(x));
    }
}

TEST_CASE("policies reject evaluation outside the interval", "[policy]") {
    const HomingProblem p = wiener_problem();
    CHECK_THROWS_AS(Policy::zero(p)(1.5), DomainError);
    CHECK_THROWS_AS(Policy::constant(p, 2.0)(-0.1), DomainError);
}

TEST_CASE("tabulated policies interpolate linearly and validate input", "[policy]") {
    const Policy t = Policy::tabulated({0.0, 0.5, 1.0}, {1.0, 2.0, 4.0});
    CHECK(t(0.0) == 1.0);
    CHECK(t(0.25) == Catch::Approx(1.5).epsilon(1e-15));
    CHECK(t(0.75) == Catch::Approx(3.0).epsilon(1e-15));
    CHECK(t(1.0) == 4.0);

    CHECK_THROWS_AS(Policy::tabulated({0.0, 0.0, 1.0}, {1.0, 1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(Policy::tabulated({0.0, 1.0}, {1.0, -1.0}), DomainError);
    CHECK_THROWS_AS(Policy::tabulated({0.0}, {1.0}), DomainError);
    CHECK_THROWS_AS(Policy::constant(wiener_problem(), -0.5), DomainError);
    CHECK_THROWS_AS(Policy::scaled(Policy::zero(wiener_problem()), 0.0), DomainError);
}

TEST_CASE("policy values stay nonnegative across kinds", "[policy]") {
    const HomingProblem p = gbm_problem();
    const ClosedFormSolution s = solve_constants(p);
    const Policy pols[] = {Policy::optimal(p, s), Policy::zero(p), Policy::constant(p, 0.7),
                           Policy::scaled(Policy::optimal(p, s), 0.5)};
    TestRng rng(5);
    for (const Policy& pol : pols)
        for (int i = 0; i < 200; ++i) REQUIRE(pol(rng.uniform(p.d1, p.d2)) >= 0.0);
}

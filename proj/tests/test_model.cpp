#include <catch_amalgamated.hpp>

#include "homing/problem.hpp"
#include "test_support.hpp"

using namespace homing;
using namespace homing::test;

TEST_CASE("validate_problem accepts the Wiener fixture", "[model]") {
    const HomingProblem p = wiener_problem();
    const HomingProblem& r = validate_problem(p);
    CHECK(&r == &p);
    CHECK_NOTHROW(validate_problem(validate_problem(p))); // idempotent
}

TEST_CASE("validate_problem rejects a degenerate interval", "[model]") {
    HomingProblem p = wiener_problem();
    p.d1 = 1.0;
    p.d2 = 1.0;
    CHECK_THROWS_MATCHES(validate_problem(p), DomainError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("d1 < d2")));
}

TEST_CASE("validate_problem rejects d1 = 0 when the branch has a logarithm", "[model]") {
    HomingProblem p = gbm_problem();
    p.d1 = 0.0;
    CHECK_THROWS_MATCHES(validate_problem(p), DomainError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("ln x")));
}

TEST_CASE("validate_problem rejects d1 = 0 when the branch has a negative power", "[model]") {
    // k = 0, n = 2j - l = 1: generic branch with F'' ~ x^{-1/2}.
    HomingProblem p = wiener_problem();
    p.variance = {1.0, 1};
    p.cost_weight = {0.5, 1};
    p.lambda = 0.5; // keep Case 2 out of it
    REQUIRE(p.case1_exponent() == 1);
    CHECK_THROWS_MATCHES(validate_problem(p), DomainError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("negative power")));
    p.d1 = 0.25;
    CHECK_NOTHROW(validate_problem(p));
}

TEST_CASE("validate_problem names the first violated invariant", "[model]") {
    HomingProblem p = wiener_problem();
    p.drift.coefficient = -1.0;
    CHECK_THROWS_AS(validate_problem(p), DomainError);

    p = wiener_problem();
    p.terminal_cost = 0.0;
    CHECK_THROWS_MATCHES(validate_problem(p), DomainError,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("K0")));

    p = wiener_problem();
    p.d1 = -0.5;
    CHECK_THROWS_AS(validate_problem(p), DomainError);
}

TEST_CASE("classify recognises the fixture cases", "[model]") {
    const CaseTag wiener = classify(wiener_problem());
    CHECK(wiener.kind == CaseKind::both);
    CHECK(wiener.n == 0);
    CHECK(wiener.h0 == Catch::Approx(0.25).epsilon(1e-15));
    CHECK(wiener.m == 0);
    CHECK(wiener.g0 == Catch::Approx(0.25).epsilon(1e-15));

    const CaseTag gbm = classify(gbm_problem());
    CHECK(gbm.kind == CaseKind::case2);
    CHECK(gbm.m == 2);
    CHECK(gbm.g0 == Catch::Approx(0.125).epsilon(1e-15));

    HomingProblem p = wiener_problem();
    p.drift = {1.0, 1};
    p.lambda = 1.0;
    CHECK(classify(p).kind == CaseKind::neither);
}

TEST_CASE("classify is pure and consistent for both-case problems", "[model]") {
    TestRng rng(2024);
    int both_seen = 0;
    for (int trial = 0; trial < 200; ++trial) {
        HomingProblem p;
        p.drift = {rng.uniform(0.2, 3.0), 0};
        p.variance = {rng.uniform(0.2, 3.0), rng.uniform_int(0, 2)};
        p.cost_weight = {rng.uniform(0.2, 3.0), rng.uniform_int(0, 2)};
        p.lambda = rng.uniform_int(0, 1) == 0 ? 0.0 : rng.uniform(-1.0, 1.0);
        p.terminal_cost = rng.uniform(0.1, 3.0);
        p.d1 = rng.uniform(0.1, 1.0);
        p.d2 = p.d1 + rng.uniform(0.1, 2.0);

        const CaseTag a = classify(p);
        const CaseTag b = classify(p);
        CHECK(a == b);
        if (a.kind == CaseKind::both) {
            ++both_seen;
            CHECK(a.m == a.n); // k = 0
            CHECK(a.g0 == Catch::Approx(a.h0 / p.drift.coefficient).epsilon(1e-14));
        }
    }
    CHECK(both_seen > 10);
}

TEST_CASE("eval_coefficient covers the edge conventions", "[model]") {
    CHECK(eval_coefficient({0.5, 0}, 0.7) == 0.5);
    CHECK(eval_coefficient({1.0, 2}, 3.0) == 9.0);
    CHECK(eval_coefficient({2.0, 0}, 0.0) == 2.0); // 0^0 = 1
    CHECK(eval_coefficient({1.5, 3}, 0.0) == 0.0);
    CHECK(eval_coefficient({2.0, -1}, 0.5) == 4.0);
    CHECK_THROWS_AS(eval_coefficient({2.0, -1}, 0.0), DomainError);
}

TEST_CASE("case exponents follow the power-law exponents", "[model]") {
    const HomingProblem gbm = gbm_problem();
    CHECK(gbm.case1_exponent() == 3);  // 2j - l
    CHECK(gbm.case2_exponent() == 2);  // 2j - l - k
    CHECK(gbm.g0() == Catch::Approx(0.125).epsilon(1e-15));

    const HomingProblem bessel = bessel_problem();
    CHECK(classify(bessel).kind == CaseKind::case2);
    CHECK(classify(bessel).m == 1);
    CHECK(classify(bessel).g0 == Catch::Approx(0.125).epsilon(1e-15));
}

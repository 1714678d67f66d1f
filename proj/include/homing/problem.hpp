#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "homing/errors.hpp"
#include "homing/power_law.hpp"

namespace homing {

/// Problem data: control the diffusion
///     dX = f(X) dt + sqrt(v(X) |u|) dW
/// on [d1, d2] until first exit, minimising the expected value of
///     integral of (q(X) u^2 / 2 + lambda) dt  +  K(X(tau)),
/// where K = 0 on exit at d1 and K = terminal_cost on exit at d2.
struct HomingProblem {
    PowerLaw drift;        // f, state/time
    PowerLaw variance;     // v, state^2/time (scaled by |u|)
    PowerLaw cost_weight;  // q, cost rate per u^2
    double lambda = 0.0;   // running cost rate, any sign
    double terminal_cost = 1.0; // K0 > 0, charged on exit at d2
    double d1 = 0.0;
    double d2 = 1.0;

    double f(double x) const { return drift(x); }
    double v(double x) const { return variance(x); }
    double q(double x) const { return cost_weight(x); }

    /// h = v^2 / (8 q), the coefficient of (F'')^2 in the reduced
    /// dynamic-programming equation.
    double h(double x) const {
        const double vx = variance(x);
        return vx * vx / (8.0 * cost_weight(x));
    }

    double h0() const {
        return variance.coefficient * variance.coefficient / (8.0 * cost_weight.coefficient);
    }
    double g0() const { return h0() / drift.coefficient; }

    /// Exponent of h(x) = h0 x^n (solvable when drift is constant).
    int case1_exponent() const { return 2 * variance.exponent - cost_weight.exponent; }
    /// Exponent of g(x) = v^2/(8 q f) = g0 x^m (solvable when lambda = 0).
    int case2_exponent() const { return case1_exponent() - drift.exponent; }
};

/// Which of the two solvable families a problem belongs to.
enum class CaseKind { case1, case2, both, neither };

/// Case picked when actually solving (a `both` problem can go either way).
enum class CaseChoice { case1, case2 };

struct CaseTag {
    CaseKind kind = CaseKind::neither;
    // Case 1 parameters (valid when kind is case1 or both):
    int n = 0;
    double h0 = 0.0;
    // Case 2 parameters (valid when kind is case2 or both):
    int m = 0;
    double g0 = 0.0;

    bool has_case1() const { return kind == CaseKind::case1 || kind == CaseKind::both; }
    bool has_case2() const { return kind == CaseKind::case2 || kind == CaseKind::both; }
    bool solvable() const { return kind != CaseKind::neither; }
};

inline bool operator==(const CaseTag& a, const CaseTag& b) {
    if (a.kind != b.kind) return false;
    if (a.has_case1() && (a.n != b.n || a.h0 != b.h0)) return false;
    if (a.has_case2() && (a.m != b.m || a.g0 != b.g0)) return false;
    return true;
}

inline std::string to_string(CaseKind k) {
    switch (k) {
        case CaseKind::case1: return "case1";
        case CaseKind::case2: return "case2";
        case CaseKind::both: return "both";
        default: return "neither";
    }
}

inline std::string to_string(CaseChoice c) {
    return c == CaseChoice::case1 ? "case1" : "case2";
}

namespace detail {

/// Effective exponents of the candidate closed-form branches, without
/// requiring the problem to be fully classified yet. Used by validation:
/// a branch with a logarithm (e in {2,3,4}) or a negative power of x
/// (any e >= 1, through F'' ~ x^{-e/2}) is undefined at x = 0.
inline std::optional<std::string> branch_requires_positive_d1(const HomingProblem& p) {
    const auto describe = [](int e) -> std::optional<std::string> {
        if (e >= 2 && e <= 4) return "branch contains ln x";
        if (e >= 1) return "branch contains a negative power of x";
        return std::nullopt;
    };
    if (p.drift.exponent == 0) {
        const int n = p.case1_exponent();
        if (n >= -2 && n <= 4) {
            if (auto why = describe(n)) return why;
        }
    }
    if (p.lambda == 0.0) {
        const int m = p.case2_exponent();
        if (m >= -4 && m <= 4) {
            if (auto why = describe(m)) return why;
        }
    }
    return std::nullopt;
}

} // namespace detail

/// Check all well-posedness invariants; returns the problem unchanged if
/// they hold, otherwise throws DomainError naming the first violation.
/// Idempotent.
inline const HomingProblem& validate_problem(const HomingProblem& p) {
    if (!(p.drift.coefficient > 0.0))
        throw DomainError("drift coefficient must be > 0");
    if (!(p.variance.coefficient > 0.0))
        throw DomainError("variance coefficient must be > 0");
    if (!(p.cost_weight.coefficient > 0.0))
        throw DomainError("cost_weight coefficient must be > 0");
    if (!std::isfinite(p.lambda))
        throw DomainError("lambda must be finite");
    if (!(p.terminal_cost > 0.0))
        throw DomainError("terminal_cost K0 must be > 0");
    if (!(p.d1 >= 0.0))
        throw DomainError("d1 must be >= 0");
    if (!(p.d1 < p.d2))
        throw DomainError("d1 < d2 violated");
    if (!std::isfinite(p.d2))
        throw DomainError("d2 must be finite");
    if (p.d1 == 0.0) {
        if (auto why = detail::branch_requires_positive_d1(p))
            throw DomainError("d1 must be > 0: " + *why);
    }
    return p;
}

/// Classify a validated problem into the solvable families.
/// Case 1 requires constant drift (k = 0) and n = 2j - l in {-2,...,4};
/// Case 2 requires lambda = 0 and m = 2j - l - k in {-4,...,4}.
/// Pure: equal inputs yield equal tags.
inline CaseTag classify(const HomingProblem& p) {
    CaseTag tag;
    const int n = p.case1_exponent();
    const int m = p.case2_exponent();
    const bool c1 = p.drift.exponent == 0 && n >= -2 && n <= 4;
    const bool c2 = p.lambda == 0.0 && m >= -4 && m <= 4;
    if (c1 && c2) tag.kind = CaseKind::both;
    else if (c1) tag.kind = CaseKind::case1;
    else if (c2) tag.kind = CaseKind::case2;
    else tag.kind = CaseKind::neither;
    if (c1) {
        tag.n = n;
        tag.h0 = p.h0();
    }
    if (c2) {
        tag.m = m;
        tag.g0 = p.g0();
    }
    return tag;
}

} // namespace homing

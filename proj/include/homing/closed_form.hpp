#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "homing/errors.hpp"
#include "homing/problem.hpp"

namespace homing {

/// Integration branch of the closed form. The second derivative
///     G(x) = F''(x) = (c/sqrt[h0]) x^{-e/2} + (f0/h0) x^{1-e}/(2-e)
/// integrates twice to a formula whose shape depends on the effective
/// exponent e: a single power-law expression for e outside {2,3,4} and
/// three logarithmic variants otherwise.
enum class BranchKind { generic, log2, log3, log4 };

struct Branch {
    BranchKind kind = BranchKind::generic;
    int e = 0; // effective exponent: n for Case 1, m for Case 2

    static Branch for_exponent(int e) {
        switch (e) {
            case 2: return {BranchKind::log2, e};
            case 3: return {BranchKind::log3, e};
            case 4: return {BranchKind::log4, e};
            default: return {BranchKind::generic, e};
        }
    }
};

inline std::string to_string(const Branch& b) {
    switch (b.kind) {
        case BranchKind::log2: return "LogBranch2";
        case BranchKind::log3: return "LogBranch3";
        case BranchKind::log4: return "LogBranch4";
        default: return "Generic(" + std::to_string(b.e) + ")";
    }
}

/// Closed-form value function
///     F(x) = c*A(x) + B(x) + c1*x + c0,
/// where A and B are the branch antiderivatives (A multiplies the free
/// constant c, B carries the drift forcing term). The constants satisfy
/// c^2 = effective_lambda + effective_f0 * c1, F(d1) = 0, F(d2) = K0,
/// and G = F'' < 0 on [d1, d2] so the extracted control is positive.
///
/// Case 1 solves h(x) [F'']^2 = lambda + f0 F' with h = h0 x^n;
/// Case 2 (lambda = 0) solves g(x) [F'']^2 = F' with g = g0 x^m, which is
/// the same family after substituting f0 -> 1, h0 -> g0, n -> m.
struct ClosedFormSolution {
    CaseChoice used_case = CaseChoice::case1;
    Branch branch;
    double c = 0.0;
    double c1 = 0.0;
    double c0 = 0.0;
    double effective_f0 = 1.0;
    double effective_h0 = 1.0;
    double effective_lambda = 0.0;
    // Evaluation domain and target terminal value, copied from the problem.
    double d1 = 0.0;
    double d2 = 1.0;
    double terminal_cost = 1.0;
    std::vector<std::string> warnings;

    double value(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;
};

namespace detail {

inline void check_domain(const ClosedFormSolution& s, double x) {
    if (!(x >= s.d1 && x <= s.d2))
        throw DomainError("x = " + std::to_string(x) + " outside [d1, d2]");
}

// Branch antiderivative A (the factor of c) and its derivatives.
inline double basis_A(const Branch& b, double h0, double x) {
    const double rs = std::sqrt(h0);
    switch (b.kind) {
        case BranchKind::log2: return (1.0 / rs) * x * (std::log(x) - 1.0);
        case BranchKind::log3: return -(4.0 / rs) * std::sqrt(x);
        case BranchKind::log4: return -(1.0 / rs) * std::log(x);
        default: {
            const double e = b.e;
            return (2.0 / rs) * std::pow(x, 2.0 - e / 2.0) / ((2.0 - e) * (2.0 - e / 2.0));
        }
    }
}

inline double basis_A_prime(const Branch& b, double h0, double x) {
    const double rs = std::sqrt(h0);
    switch (b.kind) {
        case BranchKind::log2: return (1.0 / rs) * std::log(x);
        case BranchKind::log3: return -(2.0 / rs) / std::sqrt(x);
        case BranchKind::log4: return -(1.0 / rs) / x;
        default: {
            const double e = b.e;
            return (2.0 / rs) * std::pow(x, 1.0 - e / 2.0) / (2.0 - e);
        }
    }
}

inline double basis_A_second(const Branch& b, double h0, double x) {
    return (1.0 / std::sqrt(h0)) * std::pow(x, -b.e / 2.0);
}

// Branch antiderivative B (the drift forcing term) and its derivatives.
inline double basis_B(const Branch& b, double f0, double h0, double x) {
    switch (b.kind) {
        case BranchKind::log2: {
            const double lx = std::log(x);
            return f0 / (4.0 * h0) * x * (lx * lx - 2.0 * lx + 2.0);
        }
        case BranchKind::log3: return f0 / h0 * std::log(x);
        case BranchKind::log4: return -f0 / (4.0 * h0) / x;
        default: {
            const double e = b.e;
            return f0 / h0 * std::pow(x, 3.0 - e) / ((2.0 - e) * (2.0 - e) * (3.0 - e));
        }
    }
}

inline double basis_B_prime(const Branch& b, double f0, double h0, double x) {
    switch (b.kind) {
        case BranchKind::log2: {
            const double lx = std::log(x);
            return f0 / (4.0 * h0) * lx * lx;
        }
        case BranchKind::log3: return f0 / h0 / x;
        case BranchKind::log4: return f0 / (4.0 * h0) / (x * x);
        default: {
            const double e = b.e;
            return f0 / h0 * std::pow(x, 2.0 - e) / ((2.0 - e) * (2.0 - e));
        }
    }
}

inline double basis_B_second(const Branch& b, double f0, double h0, double x) {
    switch (b.kind) {
        case BranchKind::log2: return f0 / h0 * std::log(x) / (2.0 * x);
        default: {
            const double e = b.e;
            return f0 / h0 * std::pow(x, 1.0 - e) / (2.0 - e);
        }
    }
}

} // namespace detail

/// F(x); exact at the boundaries: F(d1) = 0, F(d2) = K0.
inline double eval_F(const ClosedFormSolution& s, double x) {
    detail::check_domain(s, x);
    return s.c * detail::basis_A(s.branch, s.effective_h0, x) +
           detail::basis_B(s.branch, s.effective_f0, s.effective_h0, x) + s.c1 * x + s.c0;
}

/// F'(x), the exact derivative of the same branch expression.
inline double eval_F_prime(const ClosedFormSolution& s, double x) {
    detail::check_domain(s, x);
    return s.c * detail::basis_A_prime(s.branch, s.effective_h0, x) +
           detail::basis_B_prime(s.branch, s.effective_f0, s.effective_h0, x) + s.c1;
}

/// G(x) = F''(x); strictly negative on [d1, d2] for admissible solutions.
inline double eval_G(const ClosedFormSolution& s, double x) {
    detail::check_domain(s, x);
    return s.c * detail::basis_A_second(s.branch, s.effective_h0, x) +
           detail::basis_B_second(s.branch, s.effective_f0, s.effective_h0, x);
}

inline double ClosedFormSolution::value(double x) const { return eval_F(*this, x); }
inline double ClosedFormSolution::derivative(double x) const { return eval_F_prime(*this, x); }
inline double ClosedFormSolution::second_derivative(double x) const { return eval_G(*this, x); }

/// Optimal state feedback u*(x) = -v(x)/(2 q(x)) * F''(x) >= 0.
inline double optimal_control(const HomingProblem& p, const ClosedFormSolution& s, double x) {
    detail::check_domain(s, x);
    return -p.v(x) / (2.0 * p.q(x)) * eval_G(s, x);
}

/// Residual of the reduced dynamic-programming equation
///     lambda + f(x) F'(x) - v^2(x)/(8 q(x)) [F''(x)]^2,
/// zero for exact solutions. VF must expose value/derivative/
/// second_derivative (ClosedFormSolution does).
template <class VF>
double hjb_residual(const HomingProblem& p, const VF& F, double x) {
    const double g = F.second_derivative(x);
    return p.lambda + p.f(x) * F.derivative(x) - p.h(x) * g * g;
}

namespace detail {

struct EffectiveParams {
    double f0;
    double h0;
    double lambda;
    int e;
};

inline EffectiveParams effective_params(const HomingProblem& p, const CaseTag& tag,
                                        CaseChoice choice) {
    if (choice == CaseChoice::case1) {
        if (!tag.has_case1())
            throw CaseError("problem is not in Case 1 (drift must be constant and "
                            "2j - l within [-2, 4])");
        return {p.drift.coefficient, tag.h0, p.lambda, tag.n};
    }
    if (!tag.has_case2())
        throw CaseError("problem is not in Case 2 (lambda must be 0 and "
                        "2j - l - k within [-4, 4])");
    return {1.0, tag.g0, 0.0, tag.m};
}

/// Number of evaluation points of the admissibility grid (endpoints
/// included); uniform across all branches.
constexpr int kAdmissibilityGrid = 1001;

inline bool grid_negative_G(const ClosedFormSolution& s, int grid_points) {
    const double step = (s.d2 - s.d1) / (grid_points - 1);
    for (int i = 0; i < grid_points; ++i) {
        const double x = (i == grid_points - 1) ? s.d2 : s.d1 + i * step;
        if (!(eval_G(s, x) < 0.0)) return false;
    }
    return true;
}

inline bool grid_feasible(const HomingProblem& p, const ClosedFormSolution& s,
                          int grid_points) {
    const double step = (s.d2 - s.d1) / (grid_points - 1);
    for (int i = 0; i < grid_points; ++i) {
        const double x = (i == grid_points - 1) ? s.d2 : s.d1 + i * step;
        if (!(p.lambda + p.f(x) * eval_F_prime(s, x) >= -1e-12)) return false;
    }
    return true;
}

inline ClosedFormSolution make_candidate(const HomingProblem& p, CaseChoice choice,
                                         const EffectiveParams& ep, double root) {
    ClosedFormSolution s;
    s.used_case = choice;
    s.branch = Branch::for_exponent(ep.e);
    s.effective_f0 = ep.f0;
    s.effective_h0 = ep.h0;
    s.effective_lambda = ep.lambda;
    s.d1 = p.d1;
    s.d2 = p.d2;
    s.terminal_cost = p.terminal_cost;
    s.c = root;
    s.c1 = (root * root - ep.lambda) / ep.f0;
    s.c0 = -(root * basis_A(s.branch, ep.h0, p.d1) +
             basis_B(s.branch, ep.f0, ep.h0, p.d1) + s.c1 * p.d1) + 0.0;
    return s;
}

/// Attempt the full constant determination; empty result means "no
/// admissible solution" (reason distinguishes the error to raise).
enum class SolveFailure { none, no_real_root, inadmissible, infeasible };

inline std::optional<ClosedFormSolution> try_solve_constants(const HomingProblem& p,
                                                             CaseChoice choice,
                                                             SolveFailure& failure,
                                                             int grid_points) {
    const CaseTag tag = classify(p);
    const EffectiveParams ep = effective_params(p, tag, choice);
    const Branch branch = Branch::for_exponent(ep.e);

    // Eliminating c1 = (c^2 - lambda)/f0 from F(d2) - F(d1) = K0 leaves a
    // quadratic in c: alpha c^2 + beta c + gamma = 0.
    const double span = p.d2 - p.d1;
    const double alpha = span / ep.f0;
    const double beta =
        basis_A(branch, ep.h0, p.d2) - basis_A(branch, ep.h0, p.d1);
    const double gamma =
        basis_B(branch, ep.f0, ep.h0, p.d2) - basis_B(branch, ep.f0, ep.h0, p.d1) -
        ep.lambda * span / ep.f0 - p.terminal_cost;

    const double disc = beta * beta - 4.0 * alpha * gamma;
    if (!(disc >= 0.0)) {
        failure = SolveFailure::no_real_root;
        return std::nullopt;
    }

    double r1, r2;
    if (beta == 0.0) {
        r1 = -std::sqrt(disc) / (2.0 * alpha);
        r2 = -r1;
    } else {
        const double qd = -0.5 * (beta + std::copysign(std::sqrt(disc), beta));
        r1 = qd / alpha;
        r2 = gamma / qd;
    }
    if (r1 > r2) std::swap(r1, r2);

    std::vector<ClosedFormSolution> admissible;
    for (double root : {r1, r2}) {
        ClosedFormSolution cand = make_candidate(p, choice, ep, root);
        if (grid_negative_G(cand, grid_points)) admissible.push_back(std::move(cand));
    }
    if (admissible.empty()) {
        failure = SolveFailure::inadmissible;
        return std::nullopt;
    }

    ClosedFormSolution chosen = admissible.front(); // more negative root first
    if (admissible.size() == 2 && r1 != r2) {
        std::ostringstream os;
        os << "both quadratic roots (" << r1 << ", " << r2
           << ") satisfy G < 0 on [d1, d2]; picked the more negative one";
        chosen.warnings.push_back(os.str());
    }
    if (!grid_feasible(p, chosen, grid_points)) {
        failure = SolveFailure::infeasible;
        return std::nullopt;
    }
    failure = SolveFailure::none;
    return chosen;
}

/// Smallest admissible terminal cost, found by bisection over K0 on
/// [eps, 1000 * K0] (60 iterations); +inf if even the upper end fails.
inline double bisect_min_k0(const HomingProblem& p, CaseChoice choice, int grid_points) {
    const auto admissible_at = [&](double k0) {
        HomingProblem q = p;
        q.terminal_cost = k0;
        SolveFailure f;
        return try_solve_constants(q, choice, f, grid_points).has_value();
    };
    double lo = 1e-12;
    double hi = 1e3 * p.terminal_cost;
    if (!admissible_at(hi)) return std::numeric_limits<double>::infinity();
    if (admissible_at(lo)) return lo;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (admissible_at(mid) ? hi : lo) = mid;
    }
    return hi;
}

} // namespace detail

/// Determine (c, c1, c0) from the boundary conditions and the consistency
/// relation c^2 = lambda + f0 c1, filter the two quadratic roots by the
/// sign condition G < 0 on a uniform grid over [d1, d2], and return the
/// admissible solution (the more negative root when both pass, with a
/// diagnostic warning attached).
///
/// Throws InfeasibleError when the quadratic has no real root,
/// AdmissibilityError (annotated with the bisected minimal admissible K0)
/// when no root keeps G negative or the feasibility condition
/// lambda + f F' >= 0 fails, and CaseError when `choice` does not apply.
inline ClosedFormSolution solve_constants(const HomingProblem& p, CaseChoice choice,
                                          int grid_points = detail::kAdmissibilityGrid) {
    validate_problem(p);
    detail::SolveFailure failure;
    auto sol = detail::try_solve_constants(p, choice, failure, grid_points);
    if (!sol) {
        std::ostringstream os;
        if (failure == detail::SolveFailure::no_real_root) {
            os << "no real root: K0 = " << p.terminal_cost << " with lambda = " << p.lambda
               << " admits no closed-form solution";
            throw InfeasibleError(os.str());
        }
        const double min_k0 = detail::bisect_min_k0(p, choice, grid_points);
        if (failure == detail::SolveFailure::inadmissible) {
            os << "no root with G < 0 on [d1, d2] for K0 = " << p.terminal_cost
               << "; minimal admissible K0 = " << min_k0;
        } else {
            os << "lambda + f(x) F'(x) >= 0 fails on [d1, d2] for K0 = " << p.terminal_cost
               << "; minimal admissible K0 = " << min_k0;
        }
        throw AdmissibilityError(os.str(), min_k0);
    }

    // Boundary exactness is algebraic; anything beyond rounding indicates
    // catastrophic cancellation in the basis evaluation.
    const double scale = std::max(1.0, p.terminal_cost);
    if (std::abs(eval_F(*sol, p.d1)) > 1e-9 * scale ||
        std::abs(eval_F(*sol, p.d2) - p.terminal_cost) > 1e-9 * scale)
        throw NumericalError("boundary conditions not met to 1e-9 after constant solving");
    return *sol;
}

/// Convenience overload: prefer Case 1 when the problem is in both.
inline ClosedFormSolution solve_constants(const HomingProblem& p,
                                          int grid_points = detail::kAdmissibilityGrid) {
    const CaseTag tag = classify(validate_problem(p));
    if (tag.has_case1()) return solve_constants(p, CaseChoice::case1, grid_points);
    if (tag.has_case2()) return solve_constants(p, CaseChoice::case2, grid_points);
    throw CaseError("problem is in neither solvable case; use the numeric solver");
}

/// Smallest admissible terminal cost found numerically (bisection over
/// K0, 60 iterations); works for any classifiable problem.
inline double min_k0_numeric(const HomingProblem& p, CaseChoice choice,
                             int grid_points = detail::kAdmissibilityGrid) {
    validate_problem(p);
    return detail::bisect_min_k0(p, choice, grid_points);
}

/// Strict lower bound on the terminal cost for the two reference shapes.
///
/// Unit Wiener shape (f = 1, v = 1, q = 1/2, exponents 0):
///     K0 > (d2 - d1)^3 / 3 - lambda (d2 - d1).
/// The admissible root must satisfy c <= -d2, i.e. the radicand of the
/// root formula must exceed (d2 - d1)^4, which expands to the bound above.
///
/// Geometric shape (f = x, v = x^2, q = x, lambda = 0, d1 = 1):
///     K0 > 4 (d - 1 - ln d - ln^2(d) / 2),   d = d2.
///
/// Throws ShapeError for any other problem; callers fall back to
/// min_k0_numeric.
inline double min_k0_closed(const HomingProblem& p) {
    validate_problem(p);
    const bool wiener_shape = p.drift.exponent == 0 && p.variance.exponent == 0 &&
                              p.cost_weight.exponent == 0 && p.drift.coefficient == 1.0 &&
                              p.variance.coefficient == 1.0 && p.cost_weight.coefficient == 0.5;
    if (wiener_shape) {
        const double span = p.d2 - p.d1;
        return span * span * span / 3.0 - p.lambda * span;
    }
    const bool gbm_shape = p.drift.exponent == 1 && p.variance.exponent == 2 &&
                           p.cost_weight.exponent == 1 && p.drift.coefficient == 1.0 &&
                           p.variance.coefficient == 1.0 && p.cost_weight.coefficient == 1.0 &&
                           p.lambda == 0.0 && p.d1 == 1.0;
    if (gbm_shape) {
        const double ld = std::log(p.d2);
        return 4.0 * (p.d2 - 1.0 - ld - 0.5 * ld * ld);
    }
    throw ShapeError("no closed-form K0 bound for this problem shape");
}

} // namespace homing

#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "homing/closed_form.hpp"
#include "homing/errors.hpp"
#include "homing/policy.hpp"
#include "homing/problem.hpp"

namespace homing {

/// Numeric representation of F on [d1, d2]: the shooting solution of
///     F'' = -sqrt((lambda + f(x) F') / h(x)),   F(d1) = 0, F(d2) = K0,
/// where h = v^2/(8q) and the negative square-root branch realises the
/// required F'' < 0.
struct NumericValueFunction {
    std::vector<double> grid;           // N+1 points from d1 to d2
    std::vector<double> F_values;       // F at the grid points, F[0] = 0
    std::vector<double> F_prime_values; // F' at the grid points
    double shoot_parameter = 0.0;       // solved s = F'(d1)
    double residual_sup = 0.0;          // sup-norm of the finite-difference
                                        // residual of the equation above
};

/// One shooting attempt: either the boundary value reached, or the point
/// where the square-root argument lambda + f(x) F' first went negative
/// (meaning the trial slope is too small).
struct ShotResult {
    bool valid = false;
    double terminal_F = 0.0;
    NumericValueFunction trajectory; // partial up to the failure point when invalid
    double invalid_at_x = 0.0;
    long invalid_step = -1;
};

namespace detail {

struct ShotState {
    bool valid = true;
    double invalid_at_x = 0.0;
};

/// Classical fixed-step fourth-order integration of (F, p = F'), checking
/// the square-root domain at every stage evaluation.
template <bool Store>
ShotResult integrate_shot(const HomingProblem& p, double s, int steps) {
    const double span = p.d2 - p.d1;
    const double h_step = span / steps;

    ShotResult result;
    if constexpr (Store) {
        result.trajectory.grid.reserve(steps + 1);
        result.trajectory.F_values.reserve(steps + 1);
        result.trajectory.F_prime_values.reserve(steps + 1);
        result.trajectory.grid.push_back(p.d1);
        result.trajectory.F_values.push_back(0.0);
        result.trajectory.F_prime_values.push_back(s);
    }

    ShotState st;
    const auto rhs = [&](double x, double slope) -> double {
        const double arg = p.lambda + p.f(x) * slope;
        if (arg < 0.0) {
            if (st.valid) {
                st.valid = false;
                st.invalid_at_x = x;
            }
            return 0.0;
        }
        return -std::sqrt(arg / p.h(x));
    };

    double F = 0.0;
    double slope = s;
    for (int i = 0; i < steps; ++i) {
        const double x = p.d1 + i * h_step;
        const double k1f = slope;
        const double k1p = rhs(x, slope);
        const double k2f = slope + 0.5 * h_step * k1p;
        const double k2p = rhs(x + 0.5 * h_step, k2f);
        const double k3f = slope + 0.5 * h_step * k2p;
        const double k3p = rhs(x + 0.5 * h_step, k3f);
        const double k4f = slope + h_step * k3p;
        const double k4p = rhs(x + h_step, k4f);
        if (!st.valid) {
            result.valid = false;
            result.invalid_at_x = st.invalid_at_x;
            result.invalid_step = i;
            return result;
        }
        F += h_step / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        slope += h_step / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if constexpr (Store) {
            const double xn = (i + 1 == steps) ? p.d2 : p.d1 + (i + 1) * h_step;
            result.trajectory.grid.push_back(xn);
            result.trajectory.F_values.push_back(F);
            result.trajectory.F_prime_values.push_back(slope);
        }
    }
    result.valid = true;
    result.terminal_F = F;
    if constexpr (Store) result.trajectory.shoot_parameter = s;
    return result;
}

inline void check_bvp_preconditions(const HomingProblem& p, int steps) {
    validate_problem(p);
    if (steps < 100) throw DomainError("integration step count N must be >= 100");
    for (double x : {p.d1, p.d2}) {
        const double fx = p.f(x);
        const double hx = p.h(x);
        if (!std::isfinite(fx) || !(fx > 0.0))
            throw DomainError("f must be positive and finite on [d1, d2]");
        if (!std::isfinite(hx) || !(hx > 0.0))
            throw DomainError("v^2/(8q) must be positive and finite on [d1, d2]");
    }
}

} // namespace detail

/// Integrate one shot from F(d1) = 0, F'(d1) = s over N fixed steps.
inline ShotResult shoot(const HomingProblem& p, double s, int N) {
    detail::check_bvp_preconditions(p, N);
    return detail::integrate_shot<true>(p, s, N);
}

/// Solve the two-point boundary problem by bracketing + bisection on the
/// initial slope. The terminal value is monotone nondecreasing in s (an
/// asserted property, see the tests), so bisection on [0, s_hi] with s_hi
/// doubled from 1 until the target is overshot finds s*. Invalid shots
/// count as "terminal = -inf": a larger slope enlarges the feasible
/// region, which is what makes lambda < 0 problems solvable even though
/// the s = 0 shot is infeasible for them.
inline NumericValueFunction solve_bvp(const HomingProblem& p, int N, double tol) {
    detail::check_bvp_preconditions(p, N);
    if (!(tol > 0.0)) throw DomainError("tolerance must be > 0");
    const double k0 = p.terminal_cost;

    const auto terminal = [&](double s) -> std::optional<double> {
        const ShotResult r = detail::integrate_shot<false>(p, s, N);
        if (!r.valid || !std::isfinite(r.terminal_F)) return std::nullopt;
        return r.terminal_F;
    };

    double lo = 0.0;
    double hi = 1.0;
    bool saw_valid = false;
    double best_terminal = -std::numeric_limits<double>::infinity();
    {
        const auto t0 = terminal(0.0);
        if (t0) {
            saw_valid = true;
            best_terminal = *t0;
        }
    }
    bool bracketed = false;
    for (int i = 0; i < 60; ++i) {
        const auto t = terminal(hi);
        if (t) {
            saw_valid = true;
            best_terminal = std::max(best_terminal, *t);
            if (*t >= k0) {
                bracketed = true;
                break;
            }
        }
        lo = hi;
        hi *= 2.0;
    }
    if (!bracketed) {
        if (!saw_valid)
            throw ShotInvalidError(
                "no trial slope up to 2^60 produced an integrable shot "
                "(lambda + f F' < 0 from the start)");
        std::ostringstream os;
        os << "terminal value never reached K0 = " << k0
           << "; largest value attained was " << best_terminal;
        throw BracketError(os.str(), best_terminal);
    }

    double s_star = hi;
    bool converged = false;
    for (int i = 0; i < 300; ++i) {
        const double mid = 0.5 * (lo + hi);
        const auto t = terminal(mid);
        if (t && std::abs(*t - k0) <= tol) {
            s_star = mid;
            converged = true;
            break;
        }
        if (!t || *t < k0) lo = mid;
        else hi = mid;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) {
            s_star = hi;
            const auto th = terminal(hi);
            converged = th && std::abs(*th - k0) <= std::max(tol, 1e-12 * std::max(1.0, k0));
            break;
        }
    }
    if (!converged)
        throw NumericalError("bisection on the initial slope failed to reach the tolerance");

    ShotResult final_shot = detail::integrate_shot<true>(p, s_star, N);
    if (!final_shot.valid)
        throw NumericalError("converged slope produced an invalid shot");
    NumericValueFunction nvf = std::move(final_shot.trajectory);
    nvf.shoot_parameter = s_star;

    // Residual of the original equation with F'' from central differences.
    const double step = (p.d2 - p.d1) / N;
    double sup = 0.0;
    for (int i = 1; i < N; ++i) {
        const double x = nvf.grid[i];
        const double fpp = (nvf.F_prime_values[i + 1] - nvf.F_prime_values[i - 1]) / (2.0 * step);
        const double res = p.lambda + p.f(x) * nvf.F_prime_values[i] - p.h(x) * fpp * fpp;
        sup = std::max(sup, std::abs(res));
    }
    nvf.residual_sup = sup;
    return nvf;
}

/// Tabulated optimal policy u*(x_i) = -v/(2q) F''(x_i), with F'' taken
/// from the integrator's own right-hand side (exact given x and F',
/// no differencing noise), linearly interpolated between grid points.
inline Policy extract_policy(const NumericValueFunction& nvf, const HomingProblem& p) {
    std::vector<double> u(nvf.grid.size());
    for (std::size_t i = 0; i < nvf.grid.size(); ++i) {
        const double x = nvf.grid[i];
        const double arg = std::max(p.lambda + p.f(x) * nvf.F_prime_values[i], 0.0);
        const double fpp = -std::sqrt(arg / p.h(x));
        u[i] = -p.v(x) / (2.0 * p.q(x)) * fpp;
    }
    return Policy::tabulated(nvf.grid, std::move(u));
}

} // namespace homing

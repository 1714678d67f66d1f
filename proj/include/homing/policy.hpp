#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "homing/closed_form.hpp"
#include "homing/errors.hpp"
#include "homing/problem.hpp"

namespace homing {

/// State-feedback control rule x -> u(x) >= 0 on [d1, d2], in one of five
/// forms: the closed-form optimum, a tabulated optimum from the numeric
/// solver, a constant, a scaled wrapper around another policy, or zero.
///
/// The zero policy doubles as the degenerate optimum of problems whose
/// drift points away from the costly boundary (negative drift, lambda = 0),
/// where doing nothing already achieves zero cost; those problems are not
/// representable here and never reach the solvers.
class Policy {
public:
    struct ClosedFormOptimal {
        HomingProblem problem;
        ClosedFormSolution solution;
    };
    struct Tabulated {
        std::vector<double> grid;   // strictly increasing, spans [d1, d2]
        std::vector<double> values; // u(grid[i]) >= 0
    };
    struct Constant {
        double u0;
    };
    struct Scaled {
        std::shared_ptr<const Policy> base;
        double factor;
    };
    struct Zero {};

    static Policy optimal(const HomingProblem& p, ClosedFormSolution sol) {
        return Policy(p.d1, p.d2, ClosedFormOptimal{p, std::move(sol)});
    }

    static Policy tabulated(std::vector<double> grid, std::vector<double> values) {
        if (grid.size() < 2 || grid.size() != values.size())
            throw DomainError("tabulated policy needs matching grid/value arrays of size >= 2");
        for (std::size_t i = 0; i + 1 < grid.size(); ++i)
            if (!(grid[i] < grid[i + 1]))
                throw DomainError("tabulated policy grid must be strictly increasing");
        for (double u : values)
            if (!(u >= 0.0) || !std::isfinite(u))
                throw DomainError("tabulated policy values must be finite and >= 0");
        const double lo = grid.front();
        const double hi = grid.back();
        return Policy(lo, hi, Tabulated{std::move(grid), std::move(values)});
    }

    static Policy constant(const HomingProblem& p, double u0) {
        if (!(u0 >= 0.0)) throw DomainError("constant policy requires u0 >= 0");
        return Policy(p.d1, p.d2, Constant{u0});
    }

    static Policy scaled(Policy base, double factor) {
        if (!(factor > 0.0)) throw DomainError("scale factor must be > 0");
        const double lo = base.d1_;
        const double hi = base.d2_;
        return Policy(lo, hi, Scaled{std::make_shared<const Policy>(std::move(base)), factor});
    }

    static Policy zero(const HomingProblem& p) { return Policy(p.d1, p.d2, Zero{}); }

    /// u(x); DomainError outside [d1, d2].
    double operator()(double x) const {
        if (!(x >= d1_ && x <= d2_))
            throw DomainError("policy evaluated outside [d1, d2]");
        return eval_unchecked(x);
    }

    double d1() const { return d1_; }
    double d2() const { return d2_; }

    const auto& storage() const { return kind_; }

private:
    template <class K>
    Policy(double d1, double d2, K kind) : d1_(d1), d2_(d2), kind_(std::move(kind)) {}

    double eval_unchecked(double x) const {
        return std::visit(
            [&](const auto& k) -> double {
                using T = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<T, ClosedFormOptimal>) {
                    return optimal_control(k.problem, k.solution, x);
                } else if constexpr (std::is_same_v<T, Tabulated>) {
                    return interpolate(k, x);
                } else if constexpr (std::is_same_v<T, Constant>) {
                    return k.u0;
                } else if constexpr (std::is_same_v<T, Scaled>) {
                    return k.factor * (*k.base)(x);
                } else {
                    return 0.0;
                }
            },
            kind_);
    }

    static double interpolate(const Tabulated& t, double x) {
        const auto it = std::upper_bound(t.grid.begin(), t.grid.end(), x);
        if (it == t.grid.begin()) return t.values.front();
        if (it == t.grid.end()) return t.values.back();
        const std::size_t i = static_cast<std::size_t>(it - t.grid.begin());
        const double x0 = t.grid[i - 1];
        const double x1 = t.grid[i];
        const double w = (x - x0) / (x1 - x0);
        return (1.0 - w) * t.values[i - 1] + w * t.values[i];
    }

    double d1_;
    double d2_;
    std::variant<ClosedFormOptimal, Tabulated, Constant, Scaled, Zero> kind_;
};

/// Free-function spelling of policy evaluation.
inline double eval_policy(const Policy& pol, double x) { return pol(x); }

} // namespace homing

#pragma once

#include <stdexcept>
#include <string>

namespace homing {

/// Base class for all errors raised by this library.
class HomingError : public std::runtime_error {
public:
    explicit HomingError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid input data: a violated invariant, an out-of-domain evaluation
/// point, or a precondition failure. Named after the first violated rule.
class DomainError : public HomingError {
public:
    using HomingError::HomingError;
};

/// The requested case branch does not apply to the given problem.
class CaseError : public HomingError {
public:
    using HomingError::HomingError;
};

/// The problem does not match any shape with a known closed-form bound.
class ShapeError : public HomingError {
public:
    using HomingError::HomingError;
};

/// The constant-determining quadratic has no real root: the (K0, lambda)
/// combination admits no closed-form solution at all.
class InfeasibleError : public HomingError {
public:
    using HomingError::HomingError;
};

/// Real roots exist but none yields F'' < 0 on the whole interval (or the
/// feasibility condition fails). Carries the bisected minimal admissible
/// terminal cost when one was found.
class AdmissibilityError : public HomingError {
public:
    AdmissibilityError(const std::string& what, double min_admissible_k0)
        : HomingError(what), min_admissible_k0_(min_admissible_k0) {}

    /// Smallest terminal cost for which a solution exists, or +inf when
    /// none was found within the search interval.
    double min_admissible_k0() const { return min_admissible_k0_; }

private:
    double min_admissible_k0_;
};

/// Shooting never reached the target boundary value within 60 doublings
/// of the trial slope.
class BracketError : public HomingError {
public:
    BracketError(const std::string& what, double best_terminal)
        : HomingError(what), best_terminal_(best_terminal) {}

    /// Largest boundary value attained over all valid trial slopes.
    double best_terminal() const { return best_terminal_; }

private:
    double best_terminal_;
};

/// No trial slope produced an integrable shot (the square-root argument
/// went negative for every slope tried; only possible for lambda < 0).
class ShotInvalidError : public HomingError {
public:
    using HomingError::HomingError;
};

/// A floating-point computation produced a non-finite value, or an
/// iteration failed to converge.
class NumericalError : public HomingError {
public:
    using HomingError::HomingError;
};

/// Too many Monte Carlo paths hit the censoring horizon; the estimate
/// would be silently biased.
class CensoringError : public HomingError {
public:
    using HomingError::HomingError;
};

} // namespace homing

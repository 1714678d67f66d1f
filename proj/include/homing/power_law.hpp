#pragma once

#include <cmath>
#include <string>

#include "homing/errors.hpp"

namespace homing {

namespace detail {

/// x^e for integer e by squaring; 0^0 = 1.
inline double ipow(double x, int e) {
    if (e < 0) return 1.0 / ipow(x, -e);
    double r = 1.0;
    double b = x;
    for (unsigned n = static_cast<unsigned>(e); n != 0; n >>= 1) {
        if (n & 1u) r *= b;
        b *= b;
    }
    return r;
}

} // namespace detail

/// One coefficient function of the model: coefficient * x^exponent.
/// The drift f, the variance factor v and the control-cost weight q all
/// have this shape.
struct PowerLaw {
    double coefficient = 1.0; // must be > 0
    int exponent = 0;

    /// Evaluate at x >= 0. By convention 0^0 = 1, so constant laws are
    /// defined at x = 0; a negative exponent at x = 0 is a pole.
    double operator()(double x) const {
        if (x == 0.0 && exponent < 0) {
            throw DomainError("power law with exponent " + std::to_string(exponent) +
                              " has a pole at x = 0");
        }
        if (exponent == 0) return coefficient;
        return coefficient * detail::ipow(x, exponent);
    }
};

/// eval_coefficient(pl, x): free-function spelling of PowerLaw evaluation.
inline double eval_coefficient(const PowerLaw& pl, double x) { return pl(x); }

} // namespace homing

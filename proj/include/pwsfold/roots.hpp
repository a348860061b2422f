#pragma once

// Bracketed scalar root finding (TOMS 748) with a sensible default tolerance.

#include "pwsfold/error.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>

namespace pwsfold::roots {

/// Root of `f` in [a, b] given f(a) = fa and f(b) = fb of opposite sign.
/// Returns the bracket end with the smaller |f|.
template <class F>
double bracket_root(F&& f, double a, double b, double fa, double fb) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw NumericalError("root is not bracketed");
    std::uintmax_t iters = 200;
    boost::math::tools::eps_tolerance<double> tol(52);
    const auto [lo, hi] = boost::math::tools::toms748_solve(f, a, b, fa, fb, tol, iters);
    const double flo = f(lo);
    const double fhi = f(hi);
    return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

}  // namespace pwsfold::roots

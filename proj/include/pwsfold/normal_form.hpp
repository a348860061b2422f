#pragma once

// Normal form of the two-fold with a hidden switching term:
//   f+ = (-x2, a1, b1),  f- = (x3, b2, a2),  g = (alpha, 0, 0).

#include "pwsfold/pws.hpp"

namespace pwsfold::twofold {

struct TwoFoldParams {
    int a1 = 1;
    int a2 = 1;
    double b1 = 0.0;
    double b2 = 0.0;
    double alpha = 0.0;

    /// Throws InputError unless a1, a2 are +-1 and the reals are finite.
    void validate() const;
};

pws::PiecewiseSystem build_normal_form(const TwoFoldParams& p);

}  // namespace pwsfold::twofold

#include "pwsfold/normal_form.hpp"

#include "pwsfold/error.hpp"

#include <cmath>

namespace pwsfold::twofold {

using expr::Expression;
using expr::Var;

void TwoFoldParams::validate() const {
    if ((a1 != 1 && a1 != -1) || (a2 != 1 && a2 != -1)) throw InputError("a1 and a2 must be +1 or -1");
    if (!std::isfinite(b1) || !std::isfinite(b2) || !std::isfinite(alpha)) {
        throw InputError("b1, b2 and alpha must be finite");
    }
}

pws::PiecewiseSystem build_normal_form(const TwoFoldParams& p) {
    p.validate();
    const auto c = [](double v) { return Expression::constant(v); };
    pws::FieldExprs fplus{-Expression::variable(Var::x2), c(p.a1), c(p.b1)};
    pws::FieldExprs fminus{Expression::variable(Var::x3), c(p.b2), c(p.a2)};
    pws::FieldExprs hidden{c(p.alpha), c(0.0), c(0.0)};
    return pws::PiecewiseSystem(std::move(fplus), std::move(fminus), std::move(hidden));
}

}  // namespace pwsfold::twofold

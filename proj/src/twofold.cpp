#include "pwsfold/twofold.hpp"

#include "pwsfold/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pwsfold::twofold {

std::string_view to_string(Flavour f) {
    switch (f) {
        case Flavour::visible: return "visible";
        case Flavour::invisible: return "invisible";
        case Flavour::mixed: return "mixed";
    }
    return "?";
}

std::string_view to_string(FoldedClass c) {
    switch (c) {
        case FoldedClass::saddle: return "folded_saddle";
        case FoldedClass::node: return "folded_node";
        case FoldedClass::focus: return "folded_focus";
    }
    return "?";
}

std::string_view to_string(CanardKind c) {
    switch (c) {
        case CanardKind::canard: return "canard";
        case CanardKind::faux_canard: return "faux_canard";
        case CanardKind::none: return "none";
    }
    return "?";
}

TwoFoldClass classify_twofold(const TwoFoldParams& p) {
    p.validate();
    const double b1 = p.b1, b2 = p.b2;
    if (p.a1 == 1 && p.a2 == 1) return {Flavour::invisible, b1 < 0.0 && b2 < 0.0 && b1 * b2 > 1.0};
    if (p.a1 == -1 && p.a2 == -1) return {Flavour::visible, b1 < 0.0 || b2 < 0.0 || b1 * b2 < 1.0};
    const bool db = (b1 < 0.0 && 0.0 < b2 && b1 * b2 < -1.0) || (b1 + b2 < 0.0 && b1 - b2 < -2.0);
    return {Flavour::mixed, db};
}

namespace {

struct Sliding {
    double A2, B2, A3, B3;  // f2s = A2 + B2 phi, f3s = A3 + B3 phi
};

Sliding sliding_coefficients(const TwoFoldParams& p) {
    return {(p.a1 + p.b2) / 2.0, (p.a1 - p.b2) / 2.0, (p.b1 + p.a2) / 2.0, (p.b1 - p.a2) / 2.0};
}

}  // namespace

double folded_residual(const TwoFoldParams& p, double phi) {
    const Sliding c = sliding_coefficients(p);
    return (c.A2 + c.B2 * phi) * (-(1.0 + phi) / 2.0) + (c.A3 + c.B3 * phi) * ((1.0 - phi) / 2.0);
}

std::vector<double> folded_points(const TwoFoldParams& p) {
    p.validate();
    const double c2 = -(p.a1 - p.b2 + p.b1 - p.a2) / 2.0;
    const double c1 = -static_cast<double>(p.a1 + p.a2);
    const double c0 = (p.b1 + p.a2 - p.a1 - p.b2) / 2.0;
    std::vector<double> cand;
    if (c2 == 0.0) {
        if (c1 != 0.0) cand.push_back(-c0 / c1);
    } else {
        const double disc = c1 * c1 - 4.0 * c2 * c0;
        const double scale = c1 * c1 + std::abs(4.0 * c2 * c0);
        if (disc > 1e-14 * scale) {
            const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
            cand.push_back(q / c2);
            if (q != 0.0) cand.push_back(c0 / q);
        }
    }
    std::vector<double> out;
    for (double r : cand) {
        if (r > -1.0 && r < 1.0) out.push_back(r);
    }
    std::sort(out.begin(), out.end());
    return out;
}

CanonicalCoefficients canonical_coefficients(const TwoFoldParams& p, const reg::Sigmoid& s, double phi_s) {
    p.validate();
    if (p.alpha == 0.0) throw DegenerateError("canonical form requires alpha != 0");
    const Sliding c = sliding_coefficients(p);
    const double dphi = s.derivative(s.inverse(phi_s));
    const double k = std::sqrt(std::abs(p.alpha) * dphi);
    const double f2s = c.A2 + c.B2 * phi_s;
    const double f3s = c.A3 + c.B3 * phi_s;
    const double q = -((phi_s + 1.0) * c.B2 + (phi_s - 1.0) * c.B3) / (2.0 * k);
    const double pp = -(f2s + f3s - 2.0 * q * k) / (4.0 * std::abs(p.alpha) * dphi);
    return {pp, q, f3s};
}

FoldedClassification classify_folded(double p, double q, double r) {
    if (!std::isfinite(p) || !std::isfinite(q) || !std::isfinite(r)) {
        throw InputError("canonical coefficients must be finite");
    }
    const double rp = r * p;
    if (rp == 0.0) throw DegenerateError("degenerate folded singularity: r p = 0");
    if (8.0 * rp == q * q) throw DegenerateError("degenerate folded singularity: 8 r p = q^2");
    const CanardKind canard = q > 0.0 ? CanardKind::canard : (q < 0.0 ? CanardKind::faux_canard : CanardKind::none);
    if (rp < 0.0) return {FoldedClass::saddle, canard};
    if (8.0 * rp < q * q) return {FoldedClass::node, canard};
    return {FoldedClass::focus, CanardKind::none};
}

namespace {

using V3 = std::array<double, 3>;

// The field of the regularized normal form expressed in the canonical
// coordinates (X1, X2, X3) on the time t~, at eps = 0: component 0 is eps dX1/dt~.
class CanonicalChart {
public:
    CanonicalChart(const TwoFoldParams& p, const reg::Sigmoid& s, double phi_s)
        : sys_(build_normal_form(p)), s_(s), alpha_(p.alpha), phi_s_(phi_s) {
        sgn_ = alpha_ > 0.0 ? 1.0 : -1.0;
        dphi_s_ = s.derivative(s.inverse(phi_s));
        kappa_ = std::sqrt(std::abs(alpha_) * dphi_s_);
        d1_ = -(1.0 + phi_s) / 2.0;
        x2s_ = alpha_ * (phi_s - 1.0) * (phi_s - 1.0);
        x3s_ = -alpha_ * (phi_s + 1.0) * (phi_s + 1.0);
    }

    double kappa() const { return kappa_; }

    V3 operator()(const V3& X) const {
        const double z1 = X[0] / kappa_;
        const double z2 = X[1] / (-sgn_ * d1_ * dphi_s_);
        const double z3 = -sgn_ * X[2];

        const double y3 = z3;
        const double root = std::sqrt((1.0 + phi_s_) * (1.0 + phi_s_) - y3 / alpha_);
        const double y1L = -1.0 - phi_s_ + root;
        const double y2L = -y3 - 4.0 * alpha_ * y1L;
        const double dy2L = (1.0 - phi_s_ - y1L) / (1.0 + phi_s_ + y1L);
        const double y1 = z1 + y1L;
        const double y2 = z2 + y2L;

        const double lambda = phi_s_ + y1;
        const double u = s_.inverse(lambda);
        const pws::Vec3 f = pws::combination(sys_, {0.0, x2s_ + y2, x3s_ + y3}, lambda);

        // eps y1' = phi'(u) f1; the y1L'(y3) y3' part of eps z1' is O(eps).
        const double eps_z1 = s_.derivative(u) * f[0];
        const double z2_dot = f[1] - dy2L * f[2];
        const double z3_dot = f[2];
        // d/dt~ = -sign(alpha) d/dt.
        return {-sgn_ * kappa_ * eps_z1, -sgn_ * (-sgn_ * d1_ * dphi_s_) * z2_dot, -sgn_ * (-sgn_) * z3_dot};
    }

private:
    pws::PiecewiseSystem sys_;
    reg::Sigmoid s_;
    double alpha_, phi_s_, sgn_ = 1.0, dphi_s_ = 0.0, kappa_ = 0.0, d1_ = 0.0, x2s_ = 0.0, x3s_ = 0.0;
};

constexpr double kStep = 1e-4;

template <class F>
double first_derivative(F&& g, double h) {
    auto central = [&](double hh) { return (g(hh) - g(-hh)) / (2.0 * hh); };
    return (4.0 * central(h / 2.0) - central(h)) / 3.0;
}

template <class F>
double second_derivative(F&& g, double h) {
    const double g0 = g(0.0);
    auto central = [&](double hh) { return (g(hh) - 2.0 * g0 + g(-hh)) / (hh * hh); };
    return (4.0 * central(h / 2.0) - central(h)) / 3.0;
}

}  // namespace

CanonicalFit canonical_fit(const TwoFoldParams& p, const reg::Sigmoid& s, double phi_s) {
    p.validate();
    if (p.alpha == 0.0) throw DegenerateError("canonical form requires alpha != 0");
    if (!(std::abs(phi_s) < 1.0)) throw InputError("phi_s must lie in (-1, 1)");
    const CanonicalChart chart(p, s, phi_s);
    auto along = [&](std::size_t comp, std::size_t axis) {
        return [&chart, comp, axis](double h) {
            V3 X{0.0, 0.0, 0.0};
            X[axis] = h;
            return chart(X)[comp];
        };
    };
    CanonicalFit fit;
    const V3 origin = chart({0.0, 0.0, 0.0});
    fit.fast_scale = chart.kappa();
    fit.r = origin[2];
    fit.q = first_derivative(along(1, 0), kStep);
    fit.p = first_derivative(along(1, 2), kStep);
    fit.fast_const = origin[0] / chart.kappa();
    fit.fast_x1 = first_derivative(along(0, 0), kStep) / chart.kappa();
    fit.fast_x2 = first_derivative(along(0, 1), kStep) / chart.kappa();
    fit.fast_x1sq = 0.5 * second_derivative(along(0, 0), kStep) / chart.kappa();
    for (double v : {fit.p, fit.q, fit.r, fit.fast_x2, fit.fast_x1sq}) {
        if (!std::isfinite(v)) throw NumericalError("canonical fit produced a non-finite coefficient");
    }
    return fit;
}

std::vector<FoldedReport> folded_reports(const TwoFoldParams& p, const reg::Sigmoid& s) {
    std::vector<FoldedReport> out;
    for (double phi : folded_points(p)) {
        FoldedReport r;
        r.phi_s = phi;
        r.u_s = s.inverse(phi);
        r.x2s = p.alpha * (phi - 1.0) * (phi - 1.0);
        r.x3s = -p.alpha * (phi + 1.0) * (phi + 1.0);
        r.coefficients = canonical_coefficients(p, s, phi);
        r.classification = classify_folded(r.coefficients.p, r.coefficients.q, r.coefficients.r);
        out.push_back(r);
    }
    return out;
}

}  // namespace pwsfold::twofold

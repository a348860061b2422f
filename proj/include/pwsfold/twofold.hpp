#pragma once

// Two-fold classification, folded singularities of the regularized normal
// form and the coefficients of their canonical slow-fast form.

#include "pwsfold/normal_form.hpp"
#include "pwsfold/regularize.hpp"

#include <string_view>
#include <vector>

namespace pwsfold::twofold {

enum class Flavour { visible, invisible, mixed };

std::string_view to_string(Flavour f);

struct TwoFoldClass {
    Flavour flavour = Flavour::visible;
    bool determinacy_breaking = false;
};

TwoFoldClass classify_twofold(const TwoFoldParams& p);

/// Left side of the folded-point condition (f2s, f3s) . (-(1+phi)/2, (1-phi)/2) at phi.
double folded_residual(const TwoFoldParams& p, double phi);

/// Roots phi_s in (-1, 1) of the folded-point condition, ascending. A double
/// root (the boundary |b1 - b2| = 2 of the mixed case) counts as no point.
std::vector<double> folded_points(const TwoFoldParams& p);

struct CanonicalCoefficients {
    double p = 0.0;
    double q = 0.0;
    double r = 0.0;
};

/// Closed-form (p, q, r). DegenerateError when alpha = 0.
CanonicalCoefficients canonical_coefficients(const TwoFoldParams& p, const reg::Sigmoid& s, double phi_s);

enum class FoldedClass { saddle, node, focus };
enum class CanardKind { canard, faux_canard, none };

std::string_view to_string(FoldedClass c);
std::string_view to_string(CanardKind c);

struct FoldedClassification {
    FoldedClass folded_class = FoldedClass::saddle;
    CanardKind canard = CanardKind::none;
};

/// Saddle if rp < 0, node if 0 < 8rp < q^2, focus if q^2 < 8rp; canard by the
/// sign of q. DegenerateError on rp = 0 or 8rp = q^2.
FoldedClassification classify_folded(double p, double q, double r);

/// Taylor coefficients of the field after the explicit coordinate chain
/// (translation, rectification of L, scaling, time reversal for alpha < 0),
/// extracted at eps = 0 by Richardson-extrapolated central differences.
struct CanonicalFit {
    double p = 0.0;  // d x2'/d x3
    double q = 0.0;  // d x2'/d x1
    double r = 0.0;  // x3' at the origin
    // Fast equation eps x1' = c0 + c1 x1 + c2 x2 + c11 x1^2 + ..., divided by
    // its common scale sqrt(|alpha| phi'(u_s)) (absorbed into eps).
    double fast_const = 0.0;
    double fast_x1 = 0.0;
    double fast_x2 = 0.0;
    double fast_x1sq = 0.0;
    double fast_scale = 0.0;
};

CanonicalFit canonical_fit(const TwoFoldParams& p, const reg::Sigmoid& s, double phi_s);

struct FoldedReport {
    double phi_s = 0.0;
    double u_s = 0.0;
    double x2s = 0.0;
    double x3s = 0.0;
    CanonicalCoefficients coefficients;
    FoldedClassification classification;
};

/// One report per folded point, classified from the closed-form coefficients.
std::vector<FoldedReport> folded_reports(const TwoFoldParams& p, const reg::Sigmoid& s);

}  // namespace pwsfold::twofold

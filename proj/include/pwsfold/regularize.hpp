#pragma once

// Smooth regularization lambda = phi(x1 / eps) of a piecewise-smooth system and
// the critical objects of the resulting slow-fast problem, all computed at the
// lambda level.

#include "pwsfold/normal_form.hpp"
#include "pwsfold/pws.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace pwsfold::reg {

using pws::PiecewiseSystem;
using pws::Vec3;

class Sigmoid {
public:
    enum class Family { tanh, algebraic, cubic };

    explicit Sigmoid(Family f = Family::tanh) : family_(f) {}

    /// "tanh", "algebraic" or "cubic"; InputError otherwise.
    static Sigmoid from_name(std::string_view name);

    Family family() const { return family_; }
    std::string_view name() const;

    double value(double u) const;
    double derivative(double u) const;
    double second_derivative(double u) const;
    /// u with value(u) = lambda. Defined on (-1, 1), and on [-1, 1] for cubic.
    double inverse(double lambda) const;

private:
    Family family_;
};

/// combination(sys, x, phi(x1 / eps)).
Vec3 regularized_field(const PiecewiseSystem& sys, const Sigmoid& s, double eps, const Vec3& x);

/// f1(0, x2, x3; lambda), the fast dynamics on the layer up to the factor phi'.
double layer_field(const PiecewiseSystem& sys, double lambda, double x2, double x3);

enum class Stability { attracting, repelling, nonhyperbolic };

std::string_view to_string(Stability s);

struct CriticalPoint {
    double lambda = 0.0;
    double x2 = 0.0;
    double x3 = 0.0;
    Stability stability = Stability::attracting;
};

struct Grid {
    std::vector<double> x2;
    std::vector<double> x3;

    /// n2 x n3 nodes spanning the closed ranges; n >= 1 each (n = 1 takes the lower bound).
    static Grid uniform(double x2_min, double x2_max, std::size_t n2, double x3_min, double x3_max, std::size_t n3);
};

/// All layer equilibria over the grid (x2 outer, x3 inner), tagged by the sign of df1/dlambda.
std::vector<CriticalPoint> critical_manifold(const PiecewiseSystem& sys, const Grid& grid);

Stability stability_at(const PiecewiseSystem& sys, double lambda, double x2, double x3);

/// (lambda, alpha (lambda-1)^2, -alpha (lambda+1)^2) for n lambdas evenly spaced on [-1, 1].
std::vector<CriticalPoint> nonhyperbolic_curve(const twofold::TwoFoldParams& params, std::size_t n);

/// u' on the critical manifold from differentiating f1 = 0 along the slow flow.
/// Throws DegenerateError at non-hyperbolic points.
double slow_u_dot(const PiecewiseSystem& sys, const Sigmoid& s, const CriticalPoint& point);

struct DummyField {
    double lambda_prime = 0.0;
    double x2_dot = 0.0;
    double x3_dot = 0.0;
};

/// (f1, f2, f3)(x; lambda) from the symbolically assembled field; lambda' lives on the fast time.
DummyField dummy_field(const PiecewiseSystem& sys, const Vec3& x, double lambda);

/// d^r f1 / du^r at (u = psi(lambda), x2, x3) of the regularized normal form, 1 <= r <= 4.
double degeneracy_probe(const twofold::TwoFoldParams& params, const Sigmoid& s, const CriticalPoint& point, int order);

}  // namespace pwsfold::reg

#include "pwsfold/error.hpp"
#include "pwsfold/regularize.hpp"
#include "pwsfold/sim.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace pwsfold;
using namespace pwsfold::reg;
using twofold::TwoFoldParams;

namespace {

const Sigmoid kFamilies[] = {Sigmoid(Sigmoid::Family::tanh), Sigmoid(Sigmoid::Family::algebraic),
                             Sigmoid(Sigmoid::Family::cubic)};

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("sigmoid names") {
    CHECK(Sigmoid::from_name("tanh").family() == Sigmoid::Family::tanh);
    CHECK(Sigmoid::from_name("algebraic").name() == "algebraic");
    CHECK(Sigmoid::from_name("cubic").name() == "cubic");
    CHECK_THROWS_AS(Sigmoid::from_name("logistic"), InputError);
}

TEST_CASE("sigmoid values") {
    const Sigmoid t(Sigmoid::Family::tanh), a(Sigmoid::Family::algebraic), c(Sigmoid::Family::cubic);
    CHECK(t.value(0.5) == doctest::Approx(std::tanh(0.5)).epsilon(1e-15));
    CHECK(a.value(2.0) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-15));
    CHECK(c.value(0.5) == doctest::Approx(0.6875).epsilon(1e-15));
    CHECK(c.value(1.0) == 1.0);
    CHECK(c.value(3.0) == 1.0);
    CHECK(c.value(-7.0) == -1.0);
    CHECK(c.derivative(2.0) == 0.0);
    CHECK(c.inverse(1.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(t.inverse(1.0), InputError);
    CHECK_THROWS_AS(a.inverse(-1.5), InputError);
}

TEST_CASE("property: sigmoid inverse, monotonicity and derivatives") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uu(-3, 3);
    for (const Sigmoid& s : kFamilies) {
        CAPTURE(s.name());
        for (int n = 0; n < 500; ++n) {
            const double u = uu(rng);
            const double v = s.value(u);
            CHECK(std::abs(v) <= 1.0);
            if (s.family() != Sigmoid::Family::cubic) CHECK(std::abs(v) < 1.0);
            if (std::abs(v) < 1.0) {
                CHECK(s.derivative(u) > 0.0);
                // atanh loses digits near |lambda| = 1
                if (std::abs(v) < 0.999) CHECK(std::abs(s.inverse(v) - u) < 1e-10);
            }
            const double h = 1e-5;
            if (s.family() != Sigmoid::Family::cubic || std::abs(std::abs(u) - 1.0) > 2 * h) {
                const double fd1 = (s.value(u + h) - s.value(u - h)) / (2 * h);
                const double fd2 = (s.derivative(u + h) - s.derivative(u - h)) / (2 * h);
                CHECK(std::abs(fd1 - s.derivative(u)) < 1e-8);
                CHECK(std::abs(fd2 - s.second_derivative(u)) < 1e-8);
            }
        }
    }
}

TEST_CASE("regularized_field") {
    const auto sys = twofold::build_normal_form({1, 1, -2, -1, 0.2});
    const Sigmoid cubic(Sigmoid::Family::cubic);
    const Vec3 x{0.5, 0.3, -0.7};
    CHECK(regularized_field(sys, cubic, 1e-3, x) == sys.eval_plus(x));
    CHECK(regularized_field(sys, cubic, 1e-3, {-0.5, 0.3, -0.7}) == sys.eval_minus({-0.5, 0.3, -0.7}));
    const Vec3 mid = regularized_field(sys, Sigmoid(), 1e-5, {0, 1, 1});
    CHECK(mid[0] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(mid[1] == doctest::Approx(0.0));
    CHECK(mid[2] == doctest::Approx(-0.5));

    // smooth through x1 = 0: one-sided slopes of the tanh layer agree
    const double eps = 1e-5, h = 1e-9;
    auto f1 = [&](double x1) { return regularized_field(sys, Sigmoid(), eps, {x1, 1, 1})[0]; };
    const double right = (f1(h) - f1(0)) / h, left = (f1(0) - f1(-h)) / h;
    CHECK(rel(right, left) < 1e-3);
}

TEST_CASE("layer_field") {
    const auto sys = twofold::build_normal_form({1, 1, -2, -1, 0.0});
    CHECK(std::abs(layer_field(sys, 1.0 / 3.0, 1, 2)) < 1e-15);
    CHECK(layer_field(sys, 0.5, 1, 1) == doctest::Approx(-0.5));
    CHECK(layer_field(sys, 1.0, 0.4, 0.9) == sys.eval_plus({0, 0.4, 0.9})[0]);
}

TEST_CASE("critical_manifold: alpha = 0 exists only where x2 x3 > 0") {
    const auto sys = twofold::build_normal_form({1, 1, -2, -1, 0.0});
    const auto grid = Grid::uniform(-1.05, 1.05, 14, -1.05, 1.05, 14);
    const auto pts = critical_manifold(sys, grid);
    std::size_t expected = 0;
    for (double x2 : grid.x2)
        for (double x3 : grid.x3) expected += x2 * x3 > 0.0 ? 1 : 0;
    CHECK(pts.size() == expected);
    for (const auto& p : pts) {
        CHECK(p.x2 * p.x3 > 0.0);
        CHECK(std::abs(layer_field(sys, p.lambda, p.x2, p.x3)) < 1e-10);
        CHECK(p.stability == (p.x2 > 0 ? Stability::attracting : Stability::repelling));
    }
    CHECK_THROWS_AS(critical_manifold(sys, Grid{}), InputError);
}

TEST_CASE("critical_manifold: non-hyperbolic point on L") {
    const auto sys = twofold::build_normal_form({1, 1, -2, -1, 0.2});
    const auto pts = critical_manifold(sys, Grid{{0.2}, {-0.2}});
    REQUIRE(pts.size() == 1);
    CHECK(std::abs(pts[0].lambda) < 1e-7);
    CHECK(pts[0].stability == Stability::nonhyperbolic);
    CHECK(to_string(Stability::nonhyperbolic) == "nonhyperbolic");
}

TEST_CASE("nonhyperbolic_curve") {
    const auto flat = nonhyperbolic_curve({1, 1, -2, -1, 0.0}, 9);
    REQUIRE(flat.size() == 9);
    for (const auto& p : flat) {
        CHECK(p.x2 == 0.0);
        CHECK(p.x3 == 0.0);
    }
    const auto curve = nonhyperbolic_curve({1, 1, -2, -1, 0.2}, 3);
    CHECK(curve[0].lambda == -1.0);
    CHECK(curve[1].lambda == 0.0);
    CHECK(curve[1].x2 == doctest::Approx(0.2));
    CHECK(curve[1].x3 == doctest::Approx(-0.2));
    CHECK(curve[2].lambda == 1.0);
    CHECK(curve[2].x2 == doctest::Approx(0.0));
    CHECK(curve[2].x3 == doctest::Approx(-0.8));
    CHECK_THROWS_AS(nonhyperbolic_curve({1, 1, -2, -1, 0.2}, 1), InputError);
}

TEST_CASE("property: conditions along the non-hyperbolic curve") {
    const Sigmoid s;
    for (double alpha : {0.05, 0.2, 1.0, -0.3, 0.0}) {
        for (int a1 : {-1, 1})
            for (int a2 : {-1, 1}) {
                const TwoFoldParams p{a1, a2, 1.3, -0.4, alpha};
                const auto sys = twofold::build_normal_form(p);
                const auto curve = nonhyperbolic_curve(p, 41);
                for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
                    const auto& c = curve[i];
                    const double phi_u = s.derivative(s.inverse(c.lambda));
                    CHECK(std::abs(layer_field(sys, c.lambda, c.x2, c.x3)) < 1e-12);
                    CHECK(std::abs(sys.df1_dlambda().evaluate(0, c.x2, c.x3, c.lambda)) < 1e-12);
                    const double g2 = sys.df1_dx2().evaluate(0, c.x2, c.x3, c.lambda);
                    const double g3 = sys.df1_dx3().evaluate(0, c.x2, c.x3, c.lambda);
                    CHECK(std::hypot(g2, g3) > 0.1);
                    const double d2 = degeneracy_probe(p, s, c, 2);
                    if (alpha == 0.0) {
                        CHECK(std::abs(d2) < 1e-12);
                    } else {
                        CHECK(std::abs(d2) > 0.0);
                        CHECK(rel(d2, -2 * alpha * phi_u * phi_u) < 1e-8);
                    }
                    // tangent of the sampled curve, per unit lambda
                    const double dl = curve[i + 1].lambda - curve[i - 1].lambda;
                    const double t2 = (curve[i + 1].x2 - curve[i - 1].x2) / dl;
                    const double t3 = (curve[i + 1].x3 - curve[i - 1].x3) / dl;
                    CHECK(t2 == doctest::Approx(2 * alpha * (c.lambda - 1)).epsilon(1e-9));
                    CHECK(t3 == doctest::Approx(-2 * alpha * (c.lambda + 1)).epsilon(1e-9));
                }
            }
    }
}

TEST_CASE("degeneracy_probe: every order vanishes when alpha = 0") {
    const TwoFoldParams p{1, 1, -2, -1, 0.0};
    for (const Sigmoid& s : {Sigmoid(Sigmoid::Family::tanh), Sigmoid(Sigmoid::Family::algebraic)}) {
        for (const auto& c : nonhyperbolic_curve(p, 22)) {
            if (std::abs(c.lambda) >= 1.0) continue;
            for (int r = 1; r <= 4; ++r) CHECK(std::abs(degeneracy_probe(p, s, c, r)) < 1e-12);
        }
    }
    const auto mid = nonhyperbolic_curve({1, 1, -2, -1, 0.2}, 3)[1];
    CHECK(std::abs(degeneracy_probe({1, 1, -2, -1, 0.2}, Sigmoid(), mid, 1)) < 1e-12);
    // on L the third derivative is -6 alpha phi' phi''
    const auto off = nonhyperbolic_curve({1, 1, -2, -1, 0.2}, 5)[1];
    const Sigmoid s;
    const double u = s.inverse(off.lambda);
    CHECK(degeneracy_probe({1, 1, -2, -1, 0.2}, s, off, 3) ==
          doctest::Approx(-6 * 0.2 * s.derivative(u) * s.second_derivative(u)).epsilon(1e-6));
    CHECK_THROWS_AS(degeneracy_probe(p, Sigmoid(), mid, 5), InputError);
}

TEST_CASE("slow_u_dot") {
    const TwoFoldParams p{1, 1, -2, -1, 0.2};
    const auto sys = twofold::build_normal_form(p);
    const Sigmoid s;

    // folded point: both numerator and denominator vanish
    const double phi_s = 2.0 - std::sqrt(5.0);
    const CriticalPoint fold{phi_s, 0.2 * std::pow(phi_s - 1, 2), -0.2 * std::pow(phi_s + 1, 2),
                             Stability::nonhyperbolic};
    CHECK_THROWS_AS(slow_u_dot(sys, s, fold), DegenerateError);

    // numerator structure at (1, 1): (f2, f3) . (df1/dx2, df1/dx3)
    const double lam = (-1.0 + std::sqrt(1.16)) / 0.4;
    const CriticalPoint c{lam, 1.0, 1.0, Stability::attracting};
    const double f2 = 1.0 + (1 - lam) / 2 * (-2.0);
    const double f3 = (1 + lam) / 2 * (-2.0) + (1 - lam) / 2;
    const double num = f2 * (-(1 + lam) / 2) + f3 * ((1 - lam) / 2);
    const double den = s.derivative(s.inverse(lam)) * (-1.0 - 0.4 * lam);
    CHECK(slow_u_dot(sys, s, c) == doctest::Approx(-num / den).epsilon(1e-12));
}

TEST_CASE("slow_u_dot matches the regularized flow") {
    // After the fast transient the regularized trajectory tracks the slow
    // manifold, so d/dt psi(phi(x1/eps)) = u'/eps there.
    const TwoFoldParams p{1, 1, -2, -1, 0.2};
    const auto sys = twofold::build_normal_form(p);
    const Sigmoid s;
    const double eps = 1e-5;
    const double lam0 = (-1.0 + std::sqrt(1.16)) / 0.4;
    IntegratorOptions o;
    o.rel_tol = 1e-11;
    o.abs_tol = 1e-13;
    const auto res = sim::integrate_regularized(sys, {eps, s}, {eps * s.inverse(lam0), 1, 1}, 0.02, o);
    const auto& tr = res.trajectory;
    const double ta = 0.01, tb = 0.011;
    const Vec3 xa = sim::interpolate(tr, ta), xb = sim::interpolate(tr, tb);
    const double fd = (xb[0] - xa[0]) / eps / (tb - ta);
    const Vec3 xm = sim::interpolate(tr, 0.5 * (ta + tb));
    const auto roots = pws::sliding_lambdas(sys, xm[1], xm[2]);
    REQUIRE(roots.size() == 1);
    const double ud = slow_u_dot(sys, s, {roots[0], xm[1], xm[2], Stability::attracting});
    CHECK(rel(fd, ud) < 1e-2);
}

TEST_CASE("dummy_field") {
    const auto lin = sim::switching_demo(false);
    const DummyField d = dummy_field(lin, {0, 0, 0}, 0.5);
    CHECK(d.lambda_prime == doctest::Approx(-0.5));
    CHECK(d.x2_dot == doctest::Approx(-1.0));

    const auto sys = twofold::build_normal_form({1, 1, -2, -1, 0.2});
    for (double lam : pws::sliding_lambdas(sys, 0.7, 1.3)) {
        CHECK(std::abs(dummy_field(sys, {0, 0.7, 1.3}, lam).lambda_prime) < 1e-12);
    }
}

TEST_CASE("property: dummy system equals the sliding field at hyperbolic points") {
    const auto sys = pws::PiecewiseSystem::from_text({"-x2 + x3^2", "1 + x2*x3", "x2 - 2"},
                                                     {"x3 - x2", "x3^2 - 1", "1 + sin(x2)"},
                                                     {"0.3 + 0.1*x2*lambda", "x3", "cos(x2)"});
    const auto pts = critical_manifold(sys, Grid::uniform(-2, 2, 25, -2, 2, 25));
    REQUIRE(pts.size() > 100);
    for (const auto& c : pts) {
        if (c.stability == Stability::nonhyperbolic) continue;
        const auto slide = pws::sliding_field(sys, c.x2, c.x3, c.lambda);
        const DummyField d = dummy_field(sys, {0, c.x2, c.x3}, c.lambda);
        CHECK(std::abs(d.x2_dot - slide[0]) <= 1e-10);
        CHECK(std::abs(d.x3_dot - slide[1]) <= 1e-10);
        CHECK(std::abs(d.lambda_prime) <= 1e-9);
        const bool attracting = sys.df1_dlambda().evaluate(0, c.x2, c.x3, c.lambda) < 0;
        CHECK(c.stability == (attracting ? Stability::attracting : Stability::repelling));
    }
}

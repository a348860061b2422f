#include "pwsfold/error.hpp"
#include "pwsfold/pws.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

using namespace pwsfold;
using namespace pwsfold::pws;

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "(%.17g)", v);
    return buf;
}

PiecewiseSystem normal_form(int a1, int a2, double b1, double b2, double alpha) {
    const std::string sa1 = num(a1), sa2 = num(a2), sb1 = num(b1), sb2 = num(b2), sal = num(alpha);
    return PiecewiseSystem::from_text({"-x2", sa1, sb1}, {"x3", sb2, sa2}, {sal, "0", "0"});
}

// Switching demo lifted to 3D: f+ = (-1,-1,0), f- = (1,-1,0), optional g = (0,2,0).
PiecewiseSystem demo(bool nonlinear) {
    return PiecewiseSystem::from_text({"-1", "-1", "0"}, {"1", "-1", "0"}, {"0", nonlinear ? "2" : "0", "0"});
}

}  // namespace

TEST_CASE("combination: one-sided fields at lambda = +-1") {
    const auto sys = normal_form(1, 1, -2, -1, 0.0);
    const Vec3 v = combination(sys, {0, 1, 1}, 1.0);
    CHECK(v == Vec3{-1, 1, -2});
    const Vec3 w = combination(sys, {0.3, -0.2, 0.7}, -1.0);
    CHECK(w == sys.eval_minus({0.3, -0.2, 0.7}));
}

TEST_CASE("combination: hidden term reshapes the midpoint") {
    const auto sys = PiecewiseSystem::from_text({"1", "-1", "0"}, {"-1", "-1", "0"}, {"0", "2", "0"});
    const Vec3 v = combination(sys, {0, 0, 0}, 0.0);
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 1.0);
}

TEST_CASE("property: hidden terms vanish at lambda = +-1") {
    const auto sys = PiecewiseSystem::from_text({"x2*x3 - 1", "sin(x1)", "x3^2"}, {"x1 + 2", "x2 - x3", "cos(x2)"},
                                                {"1/(2 + lambda)", "x1*x2*lambda", "tanh(x3)"});
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int n = 0; n < 1000; ++n) {
        const Vec3 x{u(rng), u(rng), u(rng)};
        const Vec3 p = combination(sys, x, 1.0), m = combination(sys, x, -1.0);
        const Vec3 fp = sys.eval_plus(x), fm = sys.eval_minus(x);
        for (int i = 0; i < 3; ++i) {
            CHECK(std::abs(p[i] - fp[i]) <= 1e-12);
            CHECK(std::abs(m[i] - fm[i]) <= 1e-12);
        }
        // The symbolic assembly agrees with the numeric route.
        const double l = u(rng) / 3;
        const Vec3 c = combination(sys, x, l);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(sys.combined()[i].evaluate(x[0], x[1], x[2], l) == doctest::Approx(c[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("classify_surface_point on the normal form") {
    const auto sys = normal_form(1, 1, -2, -1, 0.0);
    CHECK(classify_surface_point(sys, {0, 1, 1}) == SurfaceMode::attracting_sliding);
    CHECK(classify_surface_point(sys, {0, -1, -1}) == SurfaceMode::repelling_sliding);
    CHECK(classify_surface_point(sys, {0, 1, -1}) == SurfaceMode::crossing);
    CHECK(classify_surface_point(sys, {0, 0, 1}) == SurfaceMode::tangency);
}

TEST_CASE("sliding_lambdas") {
    const auto sys0 = normal_form(1, 1, -2, -1, 0.0);
    auto r = sliding_lambdas(sys0, 1, 2);
    REQUIRE(r.size() == 1);
    CHECK(r[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(sliding_lambdas(sys0, 1, -1).empty());
    CHECK(sliding_lambdas(sys0, 0, 0).size() == 65);

    const auto sys = normal_form(1, 1, -2, -1, 0.2);
    r = sliding_lambdas(sys, 1, 1);
    REQUIRE(r.size() == 1);
    // 0.2 l^2 + l - 0.2 = 0
    CHECK(r[0] == doctest::Approx((-1.0 + std::sqrt(1.16)) / 0.4).epsilon(1e-14));
    CHECK(std::abs(normal_component(sys, 1, 1, r[0])) < 1e-12);
}

TEST_CASE("sliding_lambdas: non-polynomial dependence uses bracketing") {
    // f1 = sin(3 lambda) - x2 has three roots in [-1,1] for small x2.
    const auto sys = PiecewiseSystem::from_text({"sin(3) - x2", "0", "0"}, {"-sin(3) - x2", "0", "0"},
                                                {"(sin(3*lambda) - lambda*sin(3))/(1 - lambda^2 + 1e-300)", "0", "0"});
    // g is singular at +-1 only through the guard, so test away from that case:
    const auto sys2 = PiecewiseSystem::from_text({"1 - x2", "0", "0"}, {"-1 - x2", "0", "0"},
                                                 {"sin(3*lambda)", "0", "0"});
    CHECK(!sys2.normal_degree_in_lambda().has_value());
    const auto roots = sliding_lambdas(sys2, 0.1, 0.0);
    CHECK(roots.size() >= 1);
    for (double l : roots) CHECK(std::abs(normal_component(sys2, 0.1, 0.0, l)) < 1e-12);
    (void)sys;
}

TEST_CASE("sliding_field") {
    CHECK(sliding_field(demo(false), 0, 0, 0.0)[0] == -1.0);
    CHECK(sliding_field(demo(true), 0, 0, 0.0)[0] == 1.0);
    const auto sys = normal_form(1, 1, -2, -1, 0.0);
    const Vec2 v = sliding_field(sys, 1, 1, 0.0);
    CHECK(v[0] == 0.0);
    CHECK(v[1] == -0.5);
    CHECK_THROWS_AS(sliding_field(sys, 1, 1, 0.5), InputError);
}

TEST_CASE("property: attracting sliding has an attracting layer equilibrium") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2, 2);
    const auto sys = normal_form(1, 1, -2, -1, 0.2);
    int seen = 0;
    for (int n = 0; n < 2000; ++n) {
        const double x2 = u(rng), x3 = u(rng);
        if (classify_surface_point(sys, {0, x2, x3}) != SurfaceMode::attracting_sliding) continue;
        ++seen;
        bool attracting = false;
        for (double l : sliding_lambdas(sys, x2, x3)) {
            attracting = attracting || sys.df1_dlambda().evaluate(0, x2, x3, l) < 0.0;
        }
        CHECK(attracting);
    }
    CHECK(seen > 100);
}

TEST_CASE("integrate_pws: constant field has no events") {
    const auto sys = PiecewiseSystem::from_text({"0", "1", "0"}, {"0", "1", "0"});
    const auto tr = integrate_pws(sys, {0.3, 0, 0}, 2.0);
    CHECK(tr.events.empty());
    CHECK(tr.samples.back().t == 2.0);
    CHECK(tr.samples.back().x[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(tr.samples.back().x[0] == 0.3);
}

TEST_CASE("integrate_pws: invisible normal form enters attracting sliding") {
    const auto sys = normal_form(1, 1, -2, -1, 0.2);
    const auto tr = integrate_pws(sys, {0.5, 1, 1}, 2.0);
    REQUIRE(!tr.events.empty());
    const Event& e = tr.events.front();
    CHECK(e.kind == EventKind::slide_start);
    CHECK(std::abs(e.x[0]) <= 1e-10);
    CHECK(classify_surface_point(sys, e.x) == SurfaceMode::attracting_sliding);
    CHECK(!tr.non_unique);

    // Times strictly increase, sliding samples stay on the surface and on f1 = 0.
    for (std::size_t i = 1; i < tr.samples.size(); ++i) CHECK(tr.samples[i].t > tr.samples[i - 1].t);
    int sliding = 0;
    for (const auto& s : tr.samples) {
        if (s.mode != Mode::sliding) continue;
        ++sliding;
        REQUIRE(s.lambda.has_value());
        CHECK(std::abs(s.x[0]) <= 1e-10);
        CHECK(std::abs(normal_component(sys, s.x[1], s.x[2], *s.lambda)) < 1e-8);
    }
    CHECK(sliding > 5);
}

TEST_CASE("integrate_pws: nonlinear switching slides upward") {
    const auto tr = integrate_pws(demo(true), {0.5, 0, 0}, 2.0);
    REQUIRE(tr.events.size() == 1);
    CHECK(tr.events[0].t == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(tr.events[0].kind == EventKind::slide_start);
    REQUIRE(tr.events[0].lambda.has_value());
    CHECK(std::abs(*tr.events[0].lambda) < 1e-12);
    const auto& last = tr.samples.back();
    const double slope = (last.x[1] - tr.events[0].x[1]) / (last.t - tr.events[0].t);
    CHECK(slope == doctest::Approx(1.0).epsilon(0.01));

    const auto lin = integrate_pws(demo(false), {0.5, 0, 0}, 2.0);
    const double slope_lin = (lin.samples.back().x[1] - lin.events[0].x[1]) / (2.0 - lin.events[0].t);
    CHECK(slope_lin == doctest::Approx(-1.0).epsilon(0.01));
}

TEST_CASE("integrate_pws: crossing switches sides") {
    // x1' = -1 on both sides: the trajectory crosses once.
    const auto sys = PiecewiseSystem::from_text({"-1", "1", "0"}, {"-1", "-1", "0"});
    const auto tr = integrate_pws(sys, {0.5, 0, 0}, 1.0);
    REQUIRE(tr.events.size() == 1);
    CHECK(tr.events[0].kind == EventKind::crossing);
    CHECK(tr.events[0].t == doctest::Approx(0.5));
    CHECK(tr.samples.back().x[0] == doctest::Approx(-0.5));
    CHECK(tr.samples.back().x[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("integrate_pws: sliding exits at a tangency") {
    // f+ = (-x2, 1, 0), f- = (1, 1, 0): sliding while x2 > 0 only; x2 decreases? use x2' = -1.
    const auto sys = PiecewiseSystem::from_text({"-x2", "-1", "0"}, {"1", "-1", "0"});
    const auto tr = integrate_pws(sys, {0.0, 1.0, 0.0}, 2.0);
    bool exited = false;
    for (const auto& e : tr.events) {
        if (e.kind != EventKind::slide_exit) continue;
        exited = true;
        CHECK(e.t == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(*e.lambda == 1.0);
    }
    CHECK(exited);
    CHECK(tr.samples.back().x[0] > 0.0);
}

TEST_CASE("integrate_pws: repelling sliding sets the non-uniqueness flag") {
    const auto sys = normal_form(1, 1, -2, -1, 0.0);
    const auto tr = integrate_pws(sys, {0.0, -1.0, -1.0}, 0.1);
    CHECK(tr.non_unique);
}

TEST_CASE("integrate_pws: input validation") {
    const auto sys = normal_form(1, 1, -2, -1, 0.0);
    CHECK_THROWS_AS(integrate_pws(sys, {1, 1, 1}, 0.0), InputError);
    CHECK_THROWS_AS(integrate_pws(sys, {NAN, 1, 1}, 1.0), InputError);
}

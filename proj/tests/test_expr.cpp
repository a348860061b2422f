#include "pwsfold/error.hpp"
#include "pwsfold/expr.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace pwsfold;
using namespace pwsfold::expr;

TEST_CASE("parse: unary minus on a variable") {
    const auto e = parse_expression("-x2");
    CHECK(e.kind() == Kind::negate);
    CHECK(e.operand(0).kind() == Kind::variable);
    CHECK(e.operand(0).variable() == Var::x2);
}

TEST_CASE("parse: rational coefficients evaluate with usual precedence") {
    const auto e = parse_expression("3/10*x2 - 1/5*x2*x3 - 2/5");
    CHECK(e.evaluate(0.0, 1.0, 1.0, 0.0) == doctest::Approx(-0.3).epsilon(1e-15));
}

TEST_CASE("parse: precedence and associativity") {
    CHECK(parse_expression("2-3-4").evaluate({}) == -5.0);
    CHECK(parse_expression("8/4/2").evaluate({}) == 1.0);
    CHECK(parse_expression("-2^2").evaluate({}) == -4.0);
    CHECK(parse_expression("2^3^2").evaluate({}) == 64.0);
    CHECK(parse_expression("2*x1^-2").evaluate(2.0, 0, 0, 0) == 0.5);
    CHECK(parse_expression("1e-1*10").evaluate({}) == doctest::Approx(1.0));
    CHECK(parse_expression(" tanh( 0 ) + abs(-3) + sqrt(4) + cos(0) + sin(0)").evaluate({}) == 6.0);
}

TEST_CASE("parse: errors carry the offset") {
    try {
        parse_expression("x1 +");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
    }
    try {
        parse_expression("x1 + y");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 5);
    }
    CHECK_THROWS_AS(parse_expression(""), ParseError);
    CHECK_THROWS_AS(parse_expression("x1^1.5"), ParseError);
    CHECK_THROWS_AS(parse_expression("(x1"), ParseError);
    CHECK_THROWS_AS(parse_expression("x1 x2"), ParseError);
    CHECK_THROWS_AS(parse_expression("exp(x1)"), ParseError);
}

TEST_CASE("evaluate: examples and errors") {
    CHECK(parse_expression("x3 - x2").evaluate(0, 1, 2, 0) == 1.0);
    CHECK(parse_expression("1 - 2*lambda^2").evaluate(0, 0, 0, 1) == -1.0);
    try {
        parse_expression("1/x1").evaluate({});
        FAIL("expected EvalError");
    } catch (const EvalError& e) {
        CHECK(e.kind() == EvalErrorKind::division_by_zero);
    }
    try {
        parse_expression("sqrt(x1)").evaluate(-1, 0, 0, 0);
        FAIL("expected EvalError");
    } catch (const EvalError& e) {
        CHECK(e.kind() == EvalErrorKind::domain);
    }
    CHECK_THROWS_AS(parse_expression("x1^-1").evaluate({}), EvalError);
    CHECK_THROWS_AS(parse_expression("x1^400").evaluate(10, 0, 0, 0), EvalError);
}

TEST_CASE("differentiate: examples") {
    const auto d1 = parse_expression("(1-lambda^2)").derivative(Var::lambda);
    for (double l : {-0.7, 0.0, 0.3, 2.0}) CHECK(d1.evaluate(0, 0, 0, l) == doctest::Approx(-2 * l));

    const auto d2 = parse_expression("(1+lambda)/2*(-x2) + (1-lambda)/2*x3").derivative(Var::lambda);
    CHECK(d2.evaluate(0, 1.5, -0.25, 0.4) == doctest::Approx(-(1.5 - 0.25) / 2));
    CHECK(!d2.depends_on(Var::lambda));

    const auto d3 = parse_expression("x3").derivative(Var::x2);
    CHECK(d3.is_constant(0.0));
    CHECK(d3.to_string() == "0");
}

TEST_CASE("degree in a variable") {
    CHECK(parse_expression("x2 + lambda*x3 - 2*lambda^2").degree_in(Var::lambda) == 2);
    CHECK(parse_expression("(1-lambda^2)*(1+lambda)").degree_in(Var::lambda) == 3);
    CHECK(parse_expression("x2").degree_in(Var::lambda) == 0);
    CHECK(!parse_expression("tanh(lambda)").degree_in(Var::lambda).has_value());
    CHECK(!parse_expression("1/lambda").degree_in(Var::lambda).has_value());
    CHECK(parse_expression("lambda/2").degree_in(Var::lambda) == 1);
}

namespace {

// Random expression of bounded depth over the four variables.
Expression random_expression(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, 9);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    const int k = depth <= 0 ? pick(rng) % 2 : pick(rng);
    switch (k) {
        case 0: return Expression::constant(std::round(coef(rng) * 4.0) / 4.0);
        case 1: return Expression::variable(all_vars[static_cast<std::size_t>(pick(rng) % 4)]);
        case 2: return -random_expression(rng, depth - 1);
        case 3: return random_expression(rng, depth - 1) + random_expression(rng, depth - 1);
        case 4: return random_expression(rng, depth - 1) - random_expression(rng, depth - 1);
        case 5: return random_expression(rng, depth - 1) * random_expression(rng, depth - 1);
        case 6: return random_expression(rng, depth - 1) / random_expression(rng, depth - 1);
        case 7: return random_expression(rng, depth - 1).pow(pick(rng) % 5 - 1);
        case 8: {
            static constexpr Func fs[] = {Func::sin, Func::cos, Func::tanh, Func::sqrt, Func::abs};
            return random_expression(rng, depth - 1).apply(fs[pick(rng) % 5]);
        }
        default: return random_expression(rng, depth - 1) * Expression::variable(Var::lambda);
    }
}

Bindings random_bindings(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    return {u(rng), u(rng), u(rng), u(rng)};
}

}  // namespace

TEST_CASE("property: symbolic derivative matches central differences") {
    std::mt19937_64 rng(20240611);
    int compared = 0;
    for (int n = 0; n < 1000; ++n) {
        const Expression e = random_expression(rng, 6);
        const Var v = all_vars[static_cast<std::size_t>(n % 4)];
        const Expression de = e.derivative(v);
        const Bindings at = random_bindings(rng);
        const double h = 1e-5;
        Bindings lo = at, hi = at, lo2 = at, hi2 = at;
        const auto idx = static_cast<std::size_t>(v);
        lo[idx] -= h;
        hi[idx] += h;
        lo2[idx] -= 2 * h;
        hi2[idx] += 2 * h;
        double exact, fd, fd2;
        try {
            exact = de.evaluate(at);
            fd = (e.evaluate(hi) - e.evaluate(lo)) / (2 * h);
            fd2 = (e.evaluate(hi2) - e.evaluate(lo2)) / (4 * h);
        } catch (const EvalError&) {
            continue;
        }
        // Skip points where the function is not smooth at the sampling scale.
        const double scale = std::max(1.0, std::abs(fd));
        if (std::abs(fd - fd2) > 1e-6 * scale || std::abs(e.evaluate(at)) > 1e6) continue;
        ++compared;
        INFO(e.to_string(), " d/d", var_name(v));
        CHECK(std::abs(exact - fd) <= 1e-4 * scale);
    }
    CHECK(compared > 500);
}

TEST_CASE("property: printed form parses back to an equivalent expression") {
    std::mt19937_64 rng(77);
    for (int n = 0; n < 300; ++n) {
        const Expression e = random_expression(rng, 6);
        const std::string text = e.to_string();
        const Expression back = parse_expression(text);
        CHECK(back.to_string() == text);
        for (int k = 0; k < 100; ++k) {
            const Bindings at = random_bindings(rng);
            double a = 0, b = 0;
            bool fa = false, fb = false;
            try { a = e.evaluate(at); } catch (const EvalError&) { fa = true; }
            try { b = back.evaluate(at); } catch (const EvalError&) { fb = true; }
            REQUIRE(fa == fb);
            if (!fa && a != b) FAIL_CHECK(text, " at ", at[0], ",", at[1], ",", at[2], ",", at[3]);
        }
    }
}

TEST_CASE("expressions are safe to share across copies") {
    const Expression a = parse_expression("x1*x2");
    Expression b = a;
    b = b + Expression::constant(1.0);
    CHECK(a.evaluate(2, 3, 0, 0) == 6.0);
    CHECK(b.evaluate(2, 3, 0, 0) == 7.0);
}

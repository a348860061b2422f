#pragma once

// Scalar expressions over the four state symbols x1, x2, x3 and lambda.
//
// An Expression is an immutable post-ordered node array: every node refers
// only to nodes with smaller indices, the root is the last node. Copies share
// the array, so expressions are cheap to pass by value and safe to evaluate
// from many threads.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pwsfold::expr {

enum class Var : std::uint8_t { x1 = 0, x2 = 1, x3 = 2, lambda = 3 };

inline constexpr std::array<Var, 4> all_vars{Var::x1, Var::x2, Var::x3, Var::lambda};

std::string_view var_name(Var v);
std::optional<Var> var_from_name(std::string_view name);

enum class Func : std::uint8_t { sin, cos, tanh, sqrt, abs };

std::string_view func_name(Func f);

/// Values bound to (x1, x2, x3, lambda), in that order.
using Bindings = std::array<double, 4>;

enum class Kind : std::uint8_t { constant, variable, negate, add, sub, mul, div, pow, call };

class Expression {
public:
    /// The constant 0.
    Expression();

    static Expression constant(double value);
    static Expression variable(Var v);

    friend Expression operator+(const Expression& a, const Expression& b);
    friend Expression operator-(const Expression& a, const Expression& b);
    friend Expression operator*(const Expression& a, const Expression& b);
    friend Expression operator/(const Expression& a, const Expression& b);
    friend Expression operator-(const Expression& a);

    Expression pow(int exponent) const;
    Expression apply(Func f) const;

    /// Throws EvalError on division by zero, domain errors and non-finite results.
    double evaluate(const Bindings& at) const;
    double evaluate(double x1, double x2, double x3, double lambda) const {
        return evaluate(Bindings{x1, x2, x3, lambda});
    }

    /// Exact symbolic derivative. Constant subtrees are folded, nothing else is simplified.
    Expression derivative(Var v) const;

    /// Fully parenthesized text that parses back to an equivalent expression.
    std::string to_string() const;

    bool depends_on(Var v) const;

    /// Polynomial degree in `v`, or nullopt when `v` enters non-polynomially
    /// (inside a function, a denominator, or a negative power).
    std::optional<int> degree_in(Var v) const;

    /// True when the expression is a literal constant equal to `value`.
    bool is_constant(double value) const;

    // Structural access to the root node.
    Kind kind() const;
    double constant_value() const;
    Var variable() const;
    int exponent() const;
    Func function() const;
    Expression operand(std::size_t i) const;
    std::size_t size() const;

private:
    struct Node {
        Kind kind{Kind::constant};
        Var var{Var::x1};
        Func func{Func::sin};
        int exponent{0};
        double value{0.0};
        std::int32_t lhs{-1};
        std::int32_t rhs{-1};
    };
    using NodeList = std::vector<Node>;

    friend class Builder;
    friend class Parser;

    explicit Expression(std::shared_ptr<const NodeList> nodes);

    std::shared_ptr<const NodeList> nodes_;
};

/// Parses the expression grammar:
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := primary ('^' ['-'] integer)*
///   primary := number | variable | func '(' expr ')' | '(' expr ')'
/// Throws ParseError with the byte offset of the offending token.
Expression parse_expression(std::string_view text);

}  // namespace pwsfold::expr

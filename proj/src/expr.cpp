#include "pwsfold/expr.hpp"

#include "pwsfold/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <utility>

namespace pwsfold::expr {

std::string_view var_name(Var v) {
    switch (v) {
        case Var::x1: return "x1";
        case Var::x2: return "x2";
        case Var::x3: return "x3";
        case Var::lambda: return "lambda";
    }
    return "?";
}

std::optional<Var> var_from_name(std::string_view name) {
    for (Var v : all_vars) {
        if (var_name(v) == name) return v;
    }
    return std::nullopt;
}

std::string_view func_name(Func f) {
    switch (f) {
        case Func::sin: return "sin";
        case Func::cos: return "cos";
        case Func::tanh: return "tanh";
        case Func::sqrt: return "sqrt";
        case Func::abs: return "abs";
    }
    return "?";
}

namespace {

std::optional<Func> func_from_name(std::string_view name) {
    for (Func f : {Func::sin, Func::cos, Func::tanh, Func::sqrt, Func::abs}) {
        if (func_name(f) == name) return f;
    }
    return std::nullopt;
}

}  // namespace

// Appends nodes to a growing list. The plain make_* calls build exactly what
// they are asked for; the fold_* calls collapse constant arithmetic and the
// 0/1 identities, which keeps derivative trees from exploding.
class Builder {
public:
    using Node = Expression::Node;

    Builder() = default;
    explicit Builder(Expression::NodeList nodes) : nodes_(std::move(nodes)) {}

    int push(const Node& n) {
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }

    int append(const Expression& e) {
        const auto offset = static_cast<std::int32_t>(nodes_.size());
        for (Node n : *e.nodes_) {
            if (n.lhs >= 0) n.lhs += offset;
            if (n.rhs >= 0) n.rhs += offset;
            nodes_.push_back(n);
        }
        return static_cast<int>(nodes_.size()) - 1;
    }

    int make_constant(double v) {
        Node n;
        n.kind = Kind::constant;
        n.value = v;
        return push(n);
    }

    int make_variable(Var v) {
        Node n;
        n.kind = Kind::variable;
        n.var = v;
        return push(n);
    }

    int make_unary(Kind k, int a) {
        Node n;
        n.kind = k;
        n.lhs = a;
        return push(n);
    }

    int make_binary(Kind k, int a, int b) {
        Node n;
        n.kind = k;
        n.lhs = a;
        n.rhs = b;
        return push(n);
    }

    int make_pow(int a, int exponent) {
        Node n;
        n.kind = Kind::pow;
        n.lhs = a;
        n.exponent = exponent;
        return push(n);
    }

    int make_call(Func f, int a) {
        Node n;
        n.kind = Kind::call;
        n.func = f;
        n.lhs = a;
        return push(n);
    }

    bool is_const(int i) const { return nodes_[i].kind == Kind::constant; }
    bool is_value(int i, double v) const { return is_const(i) && nodes_[i].value == v; }
    double value(int i) const { return nodes_[i].value; }

    int fold_neg(int a) {
        if (is_const(a)) return make_constant(-value(a));
        if (nodes_[a].kind == Kind::negate) return nodes_[a].lhs;
        return make_unary(Kind::negate, a);
    }

    int fold_add(int a, int b) {
        if (is_const(a) && is_const(b)) return make_constant(value(a) + value(b));
        if (is_value(a, 0.0)) return b;
        if (is_value(b, 0.0)) return a;
        return make_binary(Kind::add, a, b);
    }

    int fold_sub(int a, int b) {
        if (is_const(a) && is_const(b)) return make_constant(value(a) - value(b));
        if (is_value(b, 0.0)) return a;
        if (is_value(a, 0.0)) return fold_neg(b);
        return make_binary(Kind::sub, a, b);
    }

    int fold_mul(int a, int b) {
        if (is_const(a) && is_const(b)) return make_constant(value(a) * value(b));
        if (is_value(a, 0.0) || is_value(b, 0.0)) return make_constant(0.0);
        if (is_value(a, 1.0)) return b;
        if (is_value(b, 1.0)) return a;
        if (is_value(a, -1.0)) return fold_neg(b);
        if (is_value(b, -1.0)) return fold_neg(a);
        return make_binary(Kind::mul, a, b);
    }

    int fold_div(int a, int b) {
        if (is_value(a, 0.0)) return make_constant(0.0);
        if (is_value(b, 1.0)) return a;
        if (is_const(a) && is_const(b) && value(b) != 0.0) return make_constant(value(a) / value(b));
        return make_binary(Kind::div, a, b);
    }

    int fold_pow(int a, int exponent) {
        if (exponent == 0) return make_constant(1.0);
        if (exponent == 1) return a;
        if (is_const(a) && exponent > 0) return make_constant(std::pow(value(a), exponent));
        return make_pow(a, exponent);
    }

    // Drops nodes unreachable from `root` and returns the finished expression.
    Expression finish(int root) {
        std::vector<char> live(nodes_.size(), 0);
        live[root] = 1;
        for (int i = root; i >= 0; --i) {
            if (!live[i]) continue;
            if (nodes_[i].lhs >= 0) live[nodes_[i].lhs] = 1;
            if (nodes_[i].rhs >= 0) live[nodes_[i].rhs] = 1;
        }
        std::vector<std::int32_t> remap(nodes_.size(), -1);
        auto out = std::make_shared<Expression::NodeList>();
        for (int i = 0; i <= root; ++i) {
            if (!live[i]) continue;
            Node n = nodes_[i];
            if (n.lhs >= 0) n.lhs = remap[n.lhs];
            if (n.rhs >= 0) n.rhs = remap[n.rhs];
            remap[i] = static_cast<std::int32_t>(out->size());
            out->push_back(n);
        }
        return Expression(std::move(out));
    }

    const Node& operator[](int i) const { return nodes_[i]; }

private:
    Expression::NodeList nodes_;
};

Expression::Expression() : Expression(constant(0.0)) {}

Expression::Expression(std::shared_ptr<const NodeList> nodes) : nodes_(std::move(nodes)) {}

Expression Expression::constant(double value) {
    Builder b;
    return b.finish(b.make_constant(value));
}

Expression Expression::variable(Var v) {
    Builder b;
    return b.finish(b.make_variable(v));
}

namespace {

Expression binary(Kind k, const Expression& a, const Expression& b) {
    Builder bl;
    const int ia = bl.append(a);
    const int ib = bl.append(b);
    return bl.finish(bl.make_binary(k, ia, ib));
}

}  // namespace

Expression operator+(const Expression& a, const Expression& b) { return binary(Kind::add, a, b); }
Expression operator-(const Expression& a, const Expression& b) { return binary(Kind::sub, a, b); }
Expression operator*(const Expression& a, const Expression& b) { return binary(Kind::mul, a, b); }
Expression operator/(const Expression& a, const Expression& b) { return binary(Kind::div, a, b); }

Expression operator-(const Expression& a) {
    Builder bl;
    return bl.finish(bl.make_unary(Kind::negate, bl.append(a)));
}

Expression Expression::pow(int exponent) const {
    Builder bl;
    return bl.finish(bl.make_pow(bl.append(*this), exponent));
}

Expression Expression::apply(Func f) const {
    Builder bl;
    return bl.finish(bl.make_call(f, bl.append(*this)));
}

namespace {

[[noreturn]] void division_by_zero() {
    throw EvalError(EvalErrorKind::division_by_zero, "division by zero");
}

double apply_func(Func f, double a) {
    switch (f) {
        case Func::sin: return std::sin(a);
        case Func::cos: return std::cos(a);
        case Func::tanh: return std::tanh(a);
        case Func::sqrt:
            if (a < 0.0) throw EvalError(EvalErrorKind::domain, "sqrt of negative value");
            return std::sqrt(a);
        case Func::abs: return std::abs(a);
    }
    return 0.0;
}

double int_pow(double base, int exponent) {
    if (exponent < 0) {
        if (base == 0.0) division_by_zero();
        return 1.0 / int_pow(base, -exponent);
    }
    double result = 1.0;
    double b = base;
    unsigned e = static_cast<unsigned>(exponent);
    while (e != 0) {
        if (e & 1u) result *= b;
        b *= b;
        e >>= 1u;
    }
    return result;
}

}  // namespace

double Expression::evaluate(const Bindings& at) const {
    const NodeList& nodes = *nodes_;
    constexpr std::size_t inline_capacity = 128;
    std::array<double, inline_capacity> inline_buf;
    std::vector<double> heap_buf;
    double* val = inline_buf.data();
    if (nodes.size() > inline_capacity) {
        heap_buf.resize(nodes.size());
        val = heap_buf.data();
    }

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& n = nodes[i];
        double r = 0.0;
        switch (n.kind) {
            case Kind::constant: r = n.value; break;
            case Kind::variable: r = at[static_cast<std::size_t>(n.var)]; break;
            case Kind::negate: r = -val[n.lhs]; break;
            case Kind::add: r = val[n.lhs] + val[n.rhs]; break;
            case Kind::sub: r = val[n.lhs] - val[n.rhs]; break;
            case Kind::mul: r = val[n.lhs] * val[n.rhs]; break;
            case Kind::div:
                if (val[n.rhs] == 0.0) division_by_zero();
                r = val[n.lhs] / val[n.rhs];
                break;
            case Kind::pow: r = int_pow(val[n.lhs], n.exponent); break;
            case Kind::call: r = apply_func(n.func, val[n.lhs]); break;
        }
        val[i] = r;
    }
    const double result = val[nodes.size() - 1];
    if (!std::isfinite(result)) {
        throw EvalError(EvalErrorKind::non_finite, "expression evaluated to a non-finite value");
    }
    return result;
}

Expression Expression::derivative(Var v) const {
    const NodeList& src = *nodes_;
    Builder b(src);  // source nodes keep their indices
    std::vector<int> d(src.size(), -1);

    for (std::size_t i = 0; i < src.size(); ++i) {
        const Node& n = src[i];
        const int a = n.lhs;
        const int c = n.rhs;
        int r = -1;
        switch (n.kind) {
            case Kind::constant: r = b.make_constant(0.0); break;
            case Kind::variable: r = b.make_constant(n.var == v ? 1.0 : 0.0); break;
            case Kind::negate: r = b.fold_neg(d[a]); break;
            case Kind::add: r = b.fold_add(d[a], d[c]); break;
            case Kind::sub: r = b.fold_sub(d[a], d[c]); break;
            case Kind::mul:
                r = b.fold_add(b.fold_mul(d[a], c), b.fold_mul(a, d[c]));
                break;
            case Kind::div: {
                // (a'c - a c') / c^2
                const int num = b.fold_sub(b.fold_mul(d[a], c), b.fold_mul(a, d[c]));
                r = b.fold_div(num, b.fold_pow(c, 2));
                break;
            }
            case Kind::pow: {
                const int k = n.exponent;
                const int outer = b.fold_mul(b.make_constant(k), b.fold_pow(a, k - 1));
                r = b.fold_mul(outer, d[a]);
                break;
            }
            case Kind::call: {
                int outer = -1;
                switch (n.func) {
                    case Func::sin: outer = b.make_call(Func::cos, a); break;
                    case Func::cos: outer = b.fold_neg(b.make_call(Func::sin, a)); break;
                    case Func::tanh:
                        outer = b.fold_sub(b.make_constant(1.0), b.fold_pow(static_cast<int>(i), 2));
                        break;
                    case Func::sqrt:
                        outer = b.fold_div(b.make_constant(1.0),
                                           b.fold_mul(b.make_constant(2.0), static_cast<int>(i)));
                        break;
                    case Func::abs:
                        // sign(a), undefined at a = 0
                        outer = b.fold_div(a, static_cast<int>(i));
                        break;
                }
                r = b.fold_mul(outer, d[a]);
                break;
            }
        }
        d[i] = r;
    }
    return b.finish(d.back());
}

namespace {

std::string format_number(double v) {
    char buf[40];
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        std::snprintf(buf, sizeof buf, "%.0f", v);
    } else {
        std::snprintf(buf, sizeof buf, "%.17g", v);
    }
    return buf;
}

}  // namespace

std::string Expression::to_string() const {
    const NodeList& nodes = *nodes_;
    std::vector<std::string> text(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& n = nodes[i];
        switch (n.kind) {
            case Kind::constant:
                text[i] = std::signbit(n.value) ? "(-" + format_number(-n.value) + ")" : format_number(n.value);
                break;
            case Kind::variable: text[i] = std::string(var_name(n.var)); break;
            case Kind::negate: text[i] = "(-" + text[n.lhs] + ")"; break;
            case Kind::add: text[i] = "(" + text[n.lhs] + " + " + text[n.rhs] + ")"; break;
            case Kind::sub: text[i] = "(" + text[n.lhs] + " - " + text[n.rhs] + ")"; break;
            case Kind::mul: text[i] = "(" + text[n.lhs] + " * " + text[n.rhs] + ")"; break;
            case Kind::div: text[i] = "(" + text[n.lhs] + " / " + text[n.rhs] + ")"; break;
            case Kind::pow: text[i] = "(" + text[n.lhs] + "^" + std::to_string(n.exponent) + ")"; break;
            case Kind::call: text[i] = std::string(func_name(n.func)) + "(" + text[n.lhs] + ")"; break;
        }
    }
    return text.back();
}

bool Expression::depends_on(Var v) const {
    return std::any_of(nodes_->begin(), nodes_->end(),
                       [v](const Node& n) { return n.kind == Kind::variable && n.var == v; });
}

std::optional<int> Expression::degree_in(Var v) const {
    const NodeList& nodes = *nodes_;
    std::vector<std::optional<int>> deg(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& n = nodes[i];
        const auto& a = n.lhs >= 0 ? deg[n.lhs] : deg[i];
        const auto& c = n.rhs >= 0 ? deg[n.rhs] : deg[i];
        std::optional<int> r;
        switch (n.kind) {
            case Kind::constant: r = 0; break;
            case Kind::variable: r = n.var == v ? 1 : 0; break;
            case Kind::negate: r = a; break;
            case Kind::add:
            case Kind::sub:
                if (a && c) r = std::max(*a, *c);
                break;
            case Kind::mul:
                if (a && c) r = *a + *c;
                break;
            case Kind::div:
                if (a && c && *c == 0) r = a;
                break;
            case Kind::pow:
                if (a && n.exponent >= 0) r = *a * n.exponent;
                else if (a && *a == 0) r = 0;
                break;
            case Kind::call:
                if (a && *a == 0) r = 0;
                break;
        }
        deg[i] = r;
    }
    return deg.back();
}

bool Expression::is_constant(double value) const {
    return nodes_->size() == 1 && nodes_->front().kind == Kind::constant && nodes_->front().value == value;
}

Kind Expression::kind() const { return nodes_->back().kind; }
double Expression::constant_value() const { return nodes_->back().value; }
Var Expression::variable() const { return nodes_->back().var; }
int Expression::exponent() const { return nodes_->back().exponent; }
Func Expression::function() const { return nodes_->back().func; }
std::size_t Expression::size() const { return nodes_->size(); }

Expression Expression::operand(std::size_t i) const {
    const Node& root = nodes_->back();
    const int idx = i == 0 ? root.lhs : root.rhs;
    if (idx < 0) throw InputError("expression node has no operand " + std::to_string(i));
    Builder b(*nodes_);
    return b.finish(idx);
}

// Recursive-descent parser over a hand-rolled tokenizer.
class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Expression run() {
        skip_space();
        if (pos_ == text_.size()) throw ParseError("empty expression", pos_);
        const int root = parse_expr();
        skip_space();
        if (pos_ != text_.size()) {
            throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
        }
        return b_.finish(root);
    }

private:
    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) {
        skip_space();
        if (pos_ >= text_.size()) throw ParseError(msg + ", found end of input", pos_);
        throw ParseError(msg + ", found '" + text_[pos_] + "'", pos_);
    }

    int parse_expr() {
        int lhs = parse_term();
        for (;;) {
            if (accept('+')) {
                lhs = b_.make_binary(Kind::add, lhs, parse_term());
            } else if (accept('-')) {
                lhs = b_.make_binary(Kind::sub, lhs, parse_term());
            } else {
                return lhs;
            }
        }
    }

    int parse_term() {
        int lhs = parse_unary();
        for (;;) {
            if (accept('*')) {
                lhs = b_.make_binary(Kind::mul, lhs, parse_unary());
            } else if (accept('/')) {
                lhs = b_.make_binary(Kind::div, lhs, parse_unary());
            } else {
                return lhs;
            }
        }
    }

    int parse_unary() {
        if (accept('-')) return b_.make_unary(Kind::negate, parse_unary());
        return parse_power();
    }

    int parse_power() {
        int base = parse_primary();
        while (accept('^')) {
            skip_space();
            const std::size_t start = pos_;
            bool negative = false;
            if (pos_ < text_.size() && text_[pos_] == '-') {
                negative = true;
                ++pos_;
            }
            const std::size_t digits = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (pos_ == digits) {
                pos_ = start;
                fail("expected integer exponent");
            }
            if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
                throw ParseError("exponent must be an integer literal", start);
            }
            int value = 0;
            const auto [ptr, ec] = std::from_chars(text_.data() + digits, text_.data() + pos_, value);
            if (ec != std::errc{}) throw ParseError("exponent out of range", start);
            base = b_.make_pow(base, negative ? -value : value);
        }
        return base;
    }

    int parse_primary() {
        skip_space();
        if (pos_ >= text_.size()) fail("expected operand");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            const int inner = parse_expr();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail("expected operand");
    }

    int parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        };
        digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            digits();
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t save = pos_++;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            const std::size_t exp_digits = pos_;
            digits();
            if (pos_ == exp_digits) pos_ = save;
        }
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (ec != std::errc{} || ptr != text_.data() + pos_) throw ParseError("malformed number", start);
        return b_.make_constant(value);
    }

    int parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = text_.substr(start, pos_ - start);
        if (auto v = var_from_name(name)) return b_.make_variable(*v);
        if (auto f = func_from_name(name)) {
            if (!accept('(')) fail("expected '(' after " + std::string(name));
            const int arg = parse_expr();
            if (!accept(')')) fail("expected ')'");
            return b_.make_call(*f, arg);
        }
        throw ParseError("unknown identifier '" + std::string(name) + "'", start);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    Builder b_;
};

Expression parse_expression(std::string_view text) { return Parser(text).run(); }

}  // namespace pwsfold::expr

#include "pwsfold/regularize.hpp"

#include "pwsfold/error.hpp"

#include <cmath>
#include <string>

namespace pwsfold::reg {

Sigmoid Sigmoid::from_name(std::string_view name) {
    if (name == "tanh") return Sigmoid(Family::tanh);
    if (name == "algebraic") return Sigmoid(Family::algebraic);
    if (name == "cubic") return Sigmoid(Family::cubic);
    throw InputError("unknown sigmoid '" + std::string(name) + "' (expected tanh, algebraic or cubic)");
}

std::string_view Sigmoid::name() const {
    switch (family_) {
        case Family::tanh: return "tanh";
        case Family::algebraic: return "algebraic";
        case Family::cubic: return "cubic";
    }
    return "?";
}

double Sigmoid::value(double u) const {
    switch (family_) {
        case Family::tanh: return std::tanh(u);
        case Family::algebraic: return u / std::sqrt(1.0 + u * u);
        case Family::cubic:
            if (u >= 1.0) return 1.0;
            if (u <= -1.0) return -1.0;
            return (3.0 * u - u * u * u) / 2.0;
    }
    return 0.0;
}

double Sigmoid::derivative(double u) const {
    switch (family_) {
        case Family::tanh: {
            const double t = std::tanh(u);
            return 1.0 - t * t;
        }
        case Family::algebraic: return std::pow(1.0 + u * u, -1.5);
        case Family::cubic: return std::abs(u) >= 1.0 ? 0.0 : 1.5 * (1.0 - u * u);
    }
    return 0.0;
}

double Sigmoid::second_derivative(double u) const {
    switch (family_) {
        case Family::tanh: {
            const double t = std::tanh(u);
            return -2.0 * t * (1.0 - t * t);
        }
        case Family::algebraic: return -3.0 * u * std::pow(1.0 + u * u, -2.5);
        case Family::cubic: return std::abs(u) >= 1.0 ? 0.0 : -3.0 * u;
    }
    return 0.0;
}

double Sigmoid::inverse(double lambda) const {
    const bool closed = family_ == Family::cubic;
    if (!(std::abs(lambda) < 1.0 || (closed && std::abs(lambda) <= 1.0))) {
        throw InputError("lambda=" + std::to_string(lambda) + " is outside the range of the " + std::string(name()) +
                         " sigmoid");
    }
    switch (family_) {
        case Family::tanh: return std::atanh(lambda);
        case Family::algebraic: return lambda / std::sqrt((1.0 - lambda) * (1.0 + lambda));
        case Family::cubic: return 2.0 * std::sin(std::asin(lambda) / 3.0);
    }
    return 0.0;
}

Vec3 regularized_field(const PiecewiseSystem& sys, const Sigmoid& s, double eps, const Vec3& x) {
    if (!(eps > 0.0)) throw InputError("eps must be positive");
    return pws::combination(sys, x, s.value(x[0] / eps));
}

double layer_field(const PiecewiseSystem& sys, double lambda, double x2, double x3) {
    return pws::normal_component(sys, x2, x3, lambda);
}

std::string_view to_string(Stability s) {
    switch (s) {
        case Stability::attracting: return "attracting";
        case Stability::repelling: return "repelling";
        case Stability::nonhyperbolic: return "nonhyperbolic";
    }
    return "?";
}

Grid Grid::uniform(double x2_min, double x2_max, std::size_t n2, double x3_min, double x3_max, std::size_t n3) {
    if (n2 < 1 || n3 < 1) throw InputError("grid needs at least one node per axis");
    if (!(x2_min <= x2_max) || !(x3_min <= x3_max)) throw InputError("grid bounds must satisfy min <= max");
    auto axis = [](double lo, double hi, std::size_t n) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
        return v;
    };
    return {axis(x2_min, x2_max, n2), axis(x3_min, x3_max, n3)};
}

Stability stability_at(const PiecewiseSystem& sys, double lambda, double x2, double x3) {
    const double d = sys.df1_dlambda().evaluate(0.0, x2, x3, lambda);
    if (std::abs(d) < 1e-9) return Stability::nonhyperbolic;
    return d < 0.0 ? Stability::attracting : Stability::repelling;
}

std::vector<CriticalPoint> critical_manifold(const PiecewiseSystem& sys, const Grid& grid) {
    if (grid.x2.empty() || grid.x3.empty()) throw InputError("empty grid");
    std::vector<CriticalPoint> out;
    for (double x2 : grid.x2) {
        for (double x3 : grid.x3) {
            for (double l : pws::sliding_lambdas(sys, x2, x3)) out.push_back({l, x2, x3, stability_at(sys, l, x2, x3)});
        }
    }
    return out;
}

std::vector<CriticalPoint> nonhyperbolic_curve(const twofold::TwoFoldParams& params, std::size_t n) {
    if (n < 2) throw InputError("need at least 2 samples");
    params.validate();
    std::vector<CriticalPoint> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double l = i + 1 == n ? 1.0 : -1.0 + 2.0 * static_cast<double>(i) / (n - 1);
        out[i] = {l, params.alpha * (l - 1.0) * (l - 1.0), -params.alpha * (l + 1.0) * (l + 1.0),
                  Stability::nonhyperbolic};
    }
    return out;
}

double slow_u_dot(const PiecewiseSystem& sys, const Sigmoid& s, const CriticalPoint& point) {
    const expr::Bindings at{0.0, point.x2, point.x3, point.lambda};
    const double df1_du = s.derivative(s.inverse(point.lambda)) * sys.df1_dlambda().evaluate(at);
    if (!(std::abs(df1_du) > 1e-9)) {
        throw DegenerateError("df1/du vanishes at lambda=" + std::to_string(point.lambda) +
                              ": non-hyperbolic point, possible folded singularity");
    }
    const double f2 = sys.combined()[1].evaluate(at);
    const double f3 = sys.combined()[2].evaluate(at);
    const double num = f2 * sys.df1_dx2().evaluate(at) + f3 * sys.df1_dx3().evaluate(at);
    return -num / df1_du;
}

DummyField dummy_field(const PiecewiseSystem& sys, const Vec3& x, double lambda) {
    const expr::Bindings at{x[0], x[1], x[2], lambda};
    return {sys.combined()[0].evaluate(at), sys.combined()[1].evaluate(at), sys.combined()[2].evaluate(at)};
}

double degeneracy_probe(const twofold::TwoFoldParams& params, const Sigmoid& s, const CriticalPoint& point,
                        int order) {
    if (order < 1 || order > 4) throw InputError("derivative order must be between 1 and 4");
    const auto sys = twofold::build_normal_form(params);
    const double x2 = point.x2;
    const double x3 = point.x3;
    // Exact second derivative in u through phi.
    auto second_at = [&](double u, double l) {
        const double d1 = sys.df1_dlambda().evaluate(0.0, x2, x3, l);
        const double d2 = sys.d2f1_dlambda2().evaluate(0.0, x2, x3, l);
        const double p1 = s.derivative(u);
        return d2 * p1 * p1 + d1 * s.second_derivative(u);
    };
    auto second = [&](double u) { return second_at(u, s.value(u)); };
    const double u = s.inverse(point.lambda);
    if (order == 1) return sys.df1_dlambda().evaluate(0.0, x2, x3, point.lambda) * s.derivative(u);
    if (order == 2) return second_at(u, point.lambda);
    constexpr double h = 1e-4;
    if (order == 3) return (second(u + h) - second(u - h)) / (2.0 * h);
    return (second(u + h) - 2.0 * second(u) + second(u - h)) / (h * h);
}

}  // namespace pwsfold::reg

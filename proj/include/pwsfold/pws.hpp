#pragma once

// Piecewise-smooth systems switching on x1 = 0, written as the lambda-family
//
//   f(x; lambda) = (1+lambda)/2 f+(x) + (1-lambda)/2 f-(x) + (1-lambda^2) g(x; lambda)
//
// with lambda = sign(x1) off the surface and lambda in [-1, 1] on it.

#include "pwsfold/expr.hpp"
#include "pwsfold/ode.hpp"

#include <array>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace pwsfold::pws {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;
using FieldExprs = std::array<expr::Expression, 3>;

class PiecewiseSystem {
public:
    PiecewiseSystem(FieldExprs fplus, FieldExprs fminus, FieldExprs hidden = {});

    /// Convenience: every component given as expression text.
    static PiecewiseSystem from_text(const std::array<std::string_view, 3>& fplus,
                                     const std::array<std::string_view, 3>& fminus,
                                     const std::array<std::string_view, 3>& hidden = {"0", "0", "0"});

    const FieldExprs& fplus() const { return fplus_; }
    const FieldExprs& fminus() const { return fminus_; }
    const FieldExprs& hidden() const { return hidden_; }

    /// f(x; lambda) assembled symbolically, one expression per component.
    const FieldExprs& combined() const { return combined_; }

    const expr::Expression& df1_dlambda() const { return df1_dl_; }
    const expr::Expression& d2f1_dlambda2() const { return d2f1_dl2_; }
    const expr::Expression& df1_dx2() const { return df1_dx2_; }
    const expr::Expression& df1_dx3() const { return df1_dx3_; }

    /// Polynomial degree of f1 in lambda, nullopt when not polynomial.
    std::optional<int> normal_degree_in_lambda() const { return f1_degree_; }

    bool has_hidden_terms() const;

    Vec3 eval_plus(const Vec3& x) const;
    Vec3 eval_minus(const Vec3& x) const;

private:
    FieldExprs fplus_;
    FieldExprs fminus_;
    FieldExprs hidden_;
    FieldExprs combined_;
    expr::Expression df1_dl_;
    expr::Expression d2f1_dl2_;
    expr::Expression df1_dx2_;
    expr::Expression df1_dx3_;
    std::optional<int> f1_degree_;
};

/// ((1+l)/2) f+ + ((1-l)/2) f- + (1-l^2) g, evaluated component-wise from the
/// three parts. Exact f+ / f- at lambda = +1 / -1 (g is not evaluated there).
Vec3 combination(const PiecewiseSystem& sys, const Vec3& x, double lambda);

enum class SurfaceMode { crossing, attracting_sliding, repelling_sliding, tangency };

std::string_view to_string(SurfaceMode m);

/// Sign classification of a surface point from f1(x, +1) and f1(x, -1).
SurfaceMode classify_surface_point(const PiecewiseSystem& sys, const Vec3& x, double tol = 1e-10);

/// f1(0, x2, x3; lambda), the normal component on the surface.
double normal_component(const PiecewiseSystem& sys, double x2, double x3, double lambda);

/// Roots of f1(0, x2, x3; lambda) = 0 in [-1, 1], ascending. When f1 vanishes
/// identically in lambda the 65 nodes of the bracketing grid are returned.
std::vector<double> sliding_lambdas(const PiecewiseSystem& sys, double x2, double x3);

/// Slow components (f2, f3) at (0, x2, x3; lambda_star). Throws InputError when
/// lambda_star is not a sliding root (|f1| > 1e-9).
Vec2 sliding_field(const PiecewiseSystem& sys, double x2, double x3, double lambda_star);

namespace detail {
/// Roots of f1(0, x2, x3; .) in [lo, hi] (quadratic formula when f1 is at most
/// quadratic in lambda, otherwise 64-interval bracketing), ascending.
std::vector<double> normal_roots(const PiecewiseSystem& sys, double x2, double x3, double lo, double hi);
}  // namespace detail

enum class Mode { free_plus, free_minus, sliding, crossing };

std::string_view to_string(Mode m);

struct Sample {
    double t = 0.0;
    Vec3 x{};
    Mode mode = Mode::free_plus;
    std::optional<double> lambda;
};

enum class EventKind {
    crossing,       // transversal passage through x1 = 0
    slide_start,    // arrival on the surface, continues on a sliding branch
    slide_exit,     // sliding branch reached lambda = +-1 (tangency), leaves to a side
    fold_jump,      // sliding branch lost at a fold of the critical set; layer jump
    grazing,        // touched the surface with |f1| below tolerance and stayed on its side
};

std::string_view to_string(EventKind k);

struct Event {
    double t = 0.0;
    Vec3 x{};
    EventKind kind = EventKind::crossing;
    std::optional<double> lambda;
};

struct Trajectory {
    std::vector<Sample> samples;
    std::vector<Event> events;
    /// Set when any stretch slid on a repelling branch, where forward solutions are not unique.
    bool non_unique = false;
    /// Set when integration stopped early because max |x_i| exceeded PwsOptions::escape_radius.
    bool escaped = false;

    double t_begin() const { return samples.front().t; }
    double t_end() const { return samples.back().t; }
    /// Appends, or overwrites the last sample when `s.t` does not advance time.
    void push(const Sample& s);
};

struct PwsOptions {
    IntegratorOptions integrator{};
    double surface_tol = 1e-10;
    double residual_tol = 1e-9;
    std::size_t max_events = 10'000;
    /// Stop once max |x_i| exceeds this (the run then ends before t_end).
    double escape_radius = std::numeric_limits<double>::infinity();
};

/// Event-driven integration of the piecewise-smooth flow: free flow on either
/// side, transversal crossing, sliding on the tracked branch of f1 = 0 with
/// exits at tangencies (lambda = +-1) and layer jumps where the branch folds.
Trajectory integrate_pws(const PiecewiseSystem& sys, const Vec3& x0, double t_end, const PwsOptions& opts = {});

}  // namespace pwsfold::pws

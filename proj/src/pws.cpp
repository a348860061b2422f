#include "pwsfold/pws.hpp"

#include "pwsfold/error.hpp"
#include "pwsfold/roots.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace pwsfold::pws {

using expr::Expression;
using expr::Var;

PiecewiseSystem::PiecewiseSystem(FieldExprs fplus, FieldExprs fminus, FieldExprs hidden)
    : fplus_(std::move(fplus)), fminus_(std::move(fminus)), hidden_(std::move(hidden)) {
    const Expression lam = Expression::variable(Var::lambda);
    const Expression one = Expression::constant(1.0);
    const Expression two = Expression::constant(2.0);
    const Expression wplus = (one + lam) / two;
    const Expression wminus = (one - lam) / two;
    const Expression bump = one - lam.pow(2);
    for (std::size_t i = 0; i < 3; ++i) {
        Expression c = wplus * fplus_[i] + wminus * fminus_[i];
        if (!hidden_[i].is_constant(0.0)) c = c + bump * hidden_[i];
        combined_[i] = c;
    }
    df1_dl_ = combined_[0].derivative(Var::lambda);
    d2f1_dl2_ = df1_dl_.derivative(Var::lambda);
    df1_dx2_ = combined_[0].derivative(Var::x2);
    df1_dx3_ = combined_[0].derivative(Var::x3);
    f1_degree_ = combined_[0].degree_in(Var::lambda);
}

PiecewiseSystem PiecewiseSystem::from_text(const std::array<std::string_view, 3>& fplus,
                                           const std::array<std::string_view, 3>& fminus,
                                           const std::array<std::string_view, 3>& hidden) {
    FieldExprs p, m, g;
    for (std::size_t i = 0; i < 3; ++i) {
        p[i] = expr::parse_expression(fplus[i]);
        m[i] = expr::parse_expression(fminus[i]);
        g[i] = expr::parse_expression(hidden[i]);
    }
    return PiecewiseSystem(std::move(p), std::move(m), std::move(g));
}

bool PiecewiseSystem::has_hidden_terms() const {
    return std::any_of(hidden_.begin(), hidden_.end(), [](const Expression& e) { return !e.is_constant(0.0); });
}

Vec3 PiecewiseSystem::eval_plus(const Vec3& x) const {
    return {fplus_[0].evaluate(x[0], x[1], x[2], 1.0), fplus_[1].evaluate(x[0], x[1], x[2], 1.0),
            fplus_[2].evaluate(x[0], x[1], x[2], 1.0)};
}

Vec3 PiecewiseSystem::eval_minus(const Vec3& x) const {
    return {fminus_[0].evaluate(x[0], x[1], x[2], -1.0), fminus_[1].evaluate(x[0], x[1], x[2], -1.0),
            fminus_[2].evaluate(x[0], x[1], x[2], -1.0)};
}

namespace {

double combine_component(const PiecewiseSystem& sys, std::size_t i, const expr::Bindings& at) {
    const double lambda = at[3];
    if (lambda == 1.0) return sys.fplus()[i].evaluate(at);
    if (lambda == -1.0) return sys.fminus()[i].evaluate(at);
    const double wp = (1.0 + lambda) / 2.0;
    const double wm = (1.0 - lambda) / 2.0;
    double v = wp * sys.fplus()[i].evaluate(at) + wm * sys.fminus()[i].evaluate(at);
    if (!sys.hidden()[i].is_constant(0.0)) v += (1.0 - lambda * lambda) * sys.hidden()[i].evaluate(at);
    return v;
}

}  // namespace

Vec3 combination(const PiecewiseSystem& sys, const Vec3& x, double lambda) {
    const expr::Bindings at{x[0], x[1], x[2], lambda};
    return {combine_component(sys, 0, at), combine_component(sys, 1, at), combine_component(sys, 2, at)};
}

std::string_view to_string(SurfaceMode m) {
    switch (m) {
        case SurfaceMode::crossing: return "crossing";
        case SurfaceMode::attracting_sliding: return "attracting_sliding";
        case SurfaceMode::repelling_sliding: return "repelling_sliding";
        case SurfaceMode::tangency: return "tangency";
    }
    return "?";
}

SurfaceMode classify_surface_point(const PiecewiseSystem& sys, const Vec3& x, double tol) {
    const double vp = sys.fplus()[0].evaluate(x[0], x[1], x[2], 1.0);
    const double vm = sys.fminus()[0].evaluate(x[0], x[1], x[2], -1.0);
    if (std::abs(vp) <= tol || std::abs(vm) <= tol) return SurfaceMode::tangency;
    if (vp < 0.0 && vm > 0.0) return SurfaceMode::attracting_sliding;
    if (vp > 0.0 && vm < 0.0) return SurfaceMode::repelling_sliding;
    return SurfaceMode::crossing;
}

double normal_component(const PiecewiseSystem& sys, double x2, double x3, double lambda) {
    return combine_component(sys, 0, {0.0, x2, x3, lambda});
}

namespace detail {

namespace {

constexpr int kGridIntervals = 64;

std::vector<double> grid_nodes(double lo, double hi) {
    std::vector<double> out(kGridIntervals + 1);
    for (int i = 0; i <= kGridIntervals; ++i) out[i] = lo + (hi - lo) * i / kGridIntervals;
    return out;
}

// Newton refinement; keeps the original when an iterate does not improve the residual.
double polish(const PiecewiseSystem& sys, double x2, double x3, double r) {
    double fr = normal_component(sys, x2, x3, r);
    for (int it = 0; it < 4 && std::abs(fr) > 1e-14; ++it) {
        const double d = sys.df1_dlambda().evaluate(0.0, x2, x3, r);
        if (d == 0.0 || !std::isfinite(d)) break;
        const double next = r - fr / d;
        const double fn = normal_component(sys, x2, x3, next);
        if (!(std::abs(fn) < std::abs(fr))) break;
        r = next;
        fr = fn;
    }
    return r;
}

std::vector<double> quadratic_roots(const PiecewiseSystem& sys, double x2, double x3, double lo, double hi) {
    const double fm = normal_component(sys, x2, x3, -1.0);
    const double f0 = normal_component(sys, x2, x3, 0.0);
    const double fp = normal_component(sys, x2, x3, 1.0);
    if (fm == 0.0 && f0 == 0.0 && fp == 0.0) return grid_nodes(lo, hi);
    const double c0 = f0;
    const double c1 = (fp - fm) / 2.0;
    const double c2 = (fp + fm) / 2.0 - f0;
    const double scale = std::max({std::abs(c0), std::abs(c1), std::abs(c2)});

    std::vector<double> cand;
    if (std::abs(c2) <= 1e-14 * scale) {
        if (c1 != 0.0) cand.push_back(-c0 / c1);
    } else {
        double disc = c1 * c1 - 4.0 * c2 * c0;
        if (disc < 0.0 && disc > -1e-12 * (c1 * c1 + std::abs(4.0 * c2 * c0))) disc = 0.0;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            const double q = -0.5 * (c1 + std::copysign(sq, c1));
            if (q != 0.0) {
                cand.push_back(q / c2);
                cand.push_back(c0 / q);
            } else {
                cand.push_back(0.0);
            }
        }
    }
    std::vector<double> out;
    constexpr double slack = 1e-12;
    for (double r : cand) {
        if (r < lo - slack || r > hi + slack) continue;
        r = polish(sys, x2, x3, std::clamp(r, lo, hi));
        out.push_back(std::clamp(r, lo, hi));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12; }),
              out.end());
    return out;
}

std::vector<double> bracketed_roots(const PiecewiseSystem& sys, double x2, double x3, double lo, double hi) {
    const auto nodes = grid_nodes(lo, hi);
    std::vector<double> vals(nodes.size());
    bool all_zero = true;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        vals[i] = normal_component(sys, x2, x3, nodes[i]);
        all_zero = all_zero && vals[i] == 0.0;
    }
    if (all_zero) return nodes;
    auto f = [&](double l) { return normal_component(sys, x2, x3, l); };
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        if (vals[i] == 0.0) {
            out.push_back(nodes[i]);
        } else if (vals[i] * vals[i + 1] < 0.0) {
            out.push_back(roots::bracket_root(f, nodes[i], nodes[i + 1], vals[i], vals[i + 1]));
        }
    }
    if (vals.back() == 0.0) out.push_back(nodes.back());
    return out;
}

}  // namespace

std::vector<double> normal_roots(const PiecewiseSystem& sys, double x2, double x3, double lo, double hi) {
    const auto deg = sys.normal_degree_in_lambda();
    if (deg && *deg <= 2) return quadratic_roots(sys, x2, x3, lo, hi);
    return bracketed_roots(sys, x2, x3, lo, hi);
}

}  // namespace detail

std::vector<double> sliding_lambdas(const PiecewiseSystem& sys, double x2, double x3) {
    return detail::normal_roots(sys, x2, x3, -1.0, 1.0);
}

Vec2 sliding_field(const PiecewiseSystem& sys, double x2, double x3, double lambda_star) {
    const double residual = normal_component(sys, x2, x3, lambda_star);
    if (!(std::abs(residual) <= 1e-9)) {
        throw InputError("lambda=" + std::to_string(lambda_star) + " is not a sliding root (|f1|=" +
                         std::to_string(std::abs(residual)) + ")");
    }
    const expr::Bindings at{0.0, x2, x3, lambda_star};
    return {combine_component(sys, 1, at), combine_component(sys, 2, at)};
}

std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::free_plus: return "free+";
        case Mode::free_minus: return "free-";
        case Mode::sliding: return "sliding";
        case Mode::crossing: return "crossing";
    }
    return "?";
}

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::crossing: return "crossing";
        case EventKind::slide_start: return "slide_start";
        case EventKind::slide_exit: return "slide_exit";
        case EventKind::fold_jump: return "fold_jump";
        case EventKind::grazing: return "grazing";
    }
    return "?";
}

void Trajectory::push(const Sample& s) {
    if (!samples.empty() && s.t <= samples.back().t) {
        samples.back() = s;
        samples.back().t = std::max(samples.back().t, s.t);
        return;
    }
    samples.push_back(s);
}

namespace {

// Phase of the event-driven integration: free flow on one side, or sliding on
// the branch of f1 = 0 through `lambda`.
struct Phase {
    enum class Kind { free, sliding } kind = Kind::free;
    int side = 1;
    double lambda = 0.0;

    static Phase free(int side) { return {Kind::free, side, static_cast<double>(side)}; }
    static Phase sliding(double lambda) { return {Kind::sliding, 0, lambda}; }
};

// Extended search window so that a tracked branch can be followed slightly
// past lambda = +-1 and the exit located by root finding.
constexpr double kTrackLo = -1.25;
constexpr double kTrackHi = 1.25;
// Largest admissible change of the tracked root between consecutive evaluations.
constexpr double kBranchJump = 0.1;

class PwsIntegrator {
public:
    PwsIntegrator(const PiecewiseSystem& sys, double t_end, const PwsOptions& opts)
        : sys_(sys), t_end_(t_end), opts_(opts) {}

    Trajectory run(const Vec3& x0) {
        double t = 0.0;
        Vec3 x = x0;
        Phase phase = initial_phase(x);
        record(t, x, phase);
        std::size_t events = 0;
        while (t < t_end_ && !traj_.escaped) {
            phase = phase.kind == Phase::Kind::free ? run_free(phase.side, t, x) : run_sliding(phase.lambda, t, x);
            if (t < t_end_ && !traj_.escaped && ++events > opts_.max_events) {
                throw NumericalError("event accumulation: more than " + std::to_string(opts_.max_events) +
                                     " events before t=" + std::to_string(t_end_));
            }
        }
        return std::move(traj_);
    }

private:
    double f1(double x2, double x3, double lambda) const { return normal_component(sys_, x2, x3, lambda); }

    bool escaped(const Vec3& y) const {
        return std::max({std::abs(y[0]), std::abs(y[1]), std::abs(y[2])}) > opts_.escape_radius;
    }

    double df1_dlambda(double x2, double x3, double lambda) const {
        return sys_.df1_dlambda().evaluate(0.0, x2, x3, lambda);
    }

    Phase initial_phase(Vec3& x) {
        if (std::abs(x[0]) > opts_.surface_tol) return Phase::free(x[0] > 0.0 ? 1 : -1);
        x[0] = 0.0;
        const auto roots = sliding_lambdas(sys_, x[1], x[2]);
        if (roots.empty()) {
            const double vp = f1(x[1], x[2], 1.0);
            return Phase::free(vp > 0.0 ? 1 : -1);
        }
        for (double r : roots) {
            if (df1_dlambda(x[1], x[2], r) < 0.0) return Phase::sliding(r);
        }
        traj_.non_unique = true;
        return Phase::sliding(roots.front());
    }

    Mode mode_of(const Phase& p) const {
        if (p.kind == Phase::Kind::sliding) return Mode::sliding;
        return p.side > 0 ? Mode::free_plus : Mode::free_minus;
    }

    void record(double t, const Vec3& x, const Phase& p) {
        Sample s{t, x, mode_of(p), std::nullopt};
        if (p.kind == Phase::Kind::sliding) s.lambda = p.lambda;
        traj_.push(s);
    }

    void add_event(double t, const Vec3& x, EventKind kind, std::optional<double> lambda) {
        traj_.events.push_back({t, x, kind, lambda});
    }

    // Emits stride samples in (t_from, t_to] through `state_at`, or just the
    // endpoint when every accepted step is recorded.
    template <class StateAt>
    void emit(double t_to, StateAt&& state_at) {
        const double stride = opts_.integrator.dense_output_stride;
        if (stride <= 0.0) {
            traj_.push(state_at(t_to));
            return;
        }
        for (;;) {
            const double ts = static_cast<double>(next_sample_) * stride;
            if (ts > t_to) break;
            traj_.push(state_at(ts));
            ++next_sample_;
        }
    }

    // Arrival on the surface from side `s`: the layer flow lambda' = f1 starts
    // at lambda = s and settles on the first root in its direction of motion;
    // if there is none, the trajectory crosses.
    Phase arrive(int s, double t, const Vec3& x) {
        const double vs = f1(x[1], x[2], static_cast<double>(s));
        if (std::abs(vs) <= opts_.residual_tol) {
            add_event(t, x, EventKind::grazing, std::nullopt);
            return Phase::free(s);
        }
        const int d = vs > 0.0 ? 1 : -1;
        const auto roots = sliding_lambdas(sys_, x[1], x[2]);
        std::optional<double> target;
        for (double r : roots) {
            const double ahead = (r - s) * d;
            if (ahead <= 1e-12) continue;
            if (!target || std::abs(r - s) < std::abs(*target - s)) target = r;
        }
        if (target) {
            add_event(t, x, EventKind::slide_start, *target);
            return Phase::sliding(*target);
        }
        if (d == -s) {
            add_event(t, x, EventKind::crossing, std::nullopt);
            traj_.push({t, x, Mode::crossing, std::nullopt});
            return Phase::free(-s);
        }
        add_event(t, x, EventKind::grazing, std::nullopt);
        return Phase::free(s);
    }

    Phase run_free(int side, double& t, Vec3& x) {
        const Phase phase = Phase::free(side);
        auto rhs = [this, side](double, const Vec3& y) { return side > 0 ? sys_.eval_plus(y) : sys_.eval_minus(y); };
        DormandPrince<3> stepper(rhs, t, x, opts_.integrator);
        const Mode mode = mode_of(phase);
        bool off_surface = side * x[0] > opts_.surface_tol;
        const double t_start = t;
        const Vec3 x_start = x;

        while (stepper.t() < t_end_) {
            stepper.advance(t_end_);
            if (escaped(stepper.y())) {
                emit(stepper.t(), [&](double tt) { return Sample{tt, stepper.dense(tt), mode, std::nullopt}; });
                t = stepper.t();
                x = stepper.y();
                traj_.push({t, x, mode, std::nullopt});
                traj_.escaped = true;
                return phase;
            }
            const double g = side * stepper.y()[0];
            if (!off_surface) {
                if (g > opts_.surface_tol) {
                    off_surface = true;
                } else if (g < 0.0) {
                    // Never left the surface: the flow on this side points back through it.
                    t = t_start;
                    x = x_start;
                    const Phase next = arrive(side, t, x);
                    if (next.kind == Phase::Kind::free && next.side == side) {
                        throw NumericalError("trajectory cannot leave the surface at t=" + std::to_string(t));
                    }
                    return next;
                }
            }
            if (off_surface && g <= 0.0) {
                const double t_hit = locate([&](double tt) { return side * stepper.dense(tt)[0]; },
                                            stepper.t_prev(), stepper.t());
                Vec3 xe = stepper.dense(t_hit);
                xe[0] = 0.0;
                emit(t_hit, [&](double tt) { return Sample{tt, stepper.dense(tt), mode, std::nullopt}; });
                traj_.push({t_hit, xe, mode, std::nullopt});
                t = t_hit;
                x = xe;
                return arrive(side, t, x);
            }
            emit(stepper.t(), [&](double tt) { return Sample{tt, stepper.dense(tt), mode, std::nullopt}; });
        }
        t = stepper.t();
        x = stepper.y();
        traj_.push({t, x, mode, std::nullopt});
        return phase;
    }

    // Root of f1 = 0 closest to `hint` in the tracking window, if the jump is admissible.
    std::optional<double> track(double x2, double x3, double hint) const {
        std::vector<double> roots;
        try {
            roots = detail::normal_roots(sys_, x2, x3, kTrackLo, kTrackHi);
        } catch (const EvalError&) {
            return std::nullopt;
        }
        std::optional<double> best;
        for (double r : roots) {
            if (!best || std::abs(r - hint) < std::abs(*best - hint)) best = r;
        }
        if (!best || std::abs(*best - hint) > kBranchJump) return std::nullopt;
        return best;
    }

    Phase run_sliding(double lambda0, double& t, Vec3& x) {
        using Y = std::array<double, 2>;
        double hint = lambda0;
        auto slow = [this](double x2, double x3, double lambda) -> Y {
            const expr::Bindings at{0.0, x2, x3, lambda};
            return {combine_component(sys_, 1, at), combine_component(sys_, 2, at)};
        };
        auto rhs = [&](double, const Y& y) -> Y {
            const auto lam = track(y[0], y[1], hint);
            if (!lam) throw RejectStep{};
            return slow(y[0], y[1], *lam);
        };
        auto sample_at = [&](const Y& y, double tt, double near) {
            const auto lam = track(y[0], y[1], near);
            return Sample{tt, {0.0, y[0], y[1]}, Mode::sliding, lam ? lam : std::optional<double>(near)};
        };
        if (df1_dlambda(x[1], x[2], lambda0) > opts_.residual_tol) traj_.non_unique = true;

        DormandPrince<2> stepper(rhs, t, Y{x[1], x[2]}, opts_.integrator);
        while (stepper.t() < t_end_) {
            const double hint_prev = hint;
            try {
                stepper.advance(t_end_);
            } catch (const StepUnderflow& e) {
                if (!e.rhs_rejected()) throw;
                t = stepper.t();
                x = {0.0, stepper.y()[0], stepper.y()[1]};
                return fold_jump(t, x, hint);
            }
            const Y y = stepper.y();
            const auto lam = track(y[0], y[1], hint);
            if (!lam) throw NumericalError("sliding branch lost after an accepted step");
            if (escaped(Vec3{0.0, y[0], y[1]})) {
                hint = std::clamp(*lam, -1.0, 1.0);
                emit(stepper.t(), [&](double tt) { return sample_at(stepper.dense(tt), tt, hint_prev); });
                t = stepper.t();
                x = {0.0, y[0], y[1]};
                traj_.push({t, x, Mode::sliding, hint});
                traj_.escaped = true;
                return Phase::sliding(hint);
            }
            hint = *lam;

            if (std::abs(hint) > 1.0) {
                const double edge = hint > 0.0 ? 1.0 : -1.0;
                const double t_exit = locate(
                    [&](double tt) {
                        const Y ye = stepper.dense(tt);
                        const auto le = track(ye[0], ye[1], hint_prev);
                        return edge * (edge - (le ? *le : edge));
                    },
                    stepper.t_prev(), stepper.t());
                const Y ye = stepper.dense(t_exit);
                emit(t_exit, [&](double tt) { return sample_at(stepper.dense(tt), tt, hint_prev); });
                t = t_exit;
                x = {0.0, ye[0], ye[1]};
                traj_.push({t, x, Mode::sliding, edge});
                add_event(t, x, EventKind::slide_exit, edge);
                return leave_edge(static_cast<int>(edge), t, x);
            }
            if (df1_dlambda(y[0], y[1], hint) > opts_.residual_tol) traj_.non_unique = true;
            emit(stepper.t(), [&](double tt) { return sample_at(stepper.dense(tt), tt, hint_prev); });
        }
        t = stepper.t();
        x = {0.0, stepper.y()[0], stepper.y()[1]};
        traj_.push({t, x, Mode::sliding, hint});
        return Phase::sliding(hint);
    }

    // The tracked root has just passed lambda = e. Past the exit f1(e) has the
    // sign -e * sign(df1/dlambda): an attracting branch hands over to the free
    // flow on side e, a repelling one sends the layer flow back into the
    // interior towards the next root (or through to the other side).
    Phase leave_edge(int e, double t, const Vec3& x) {
        const double slope = df1_dlambda(x[1], x[2], static_cast<double>(e));
        if (slope <= 0.0) return Phase::free(e);
        const int d = -e;
        std::optional<double> target;
        for (double r : sliding_lambdas(sys_, x[1], x[2])) {
            const double ahead = (r - e) * d;
            if (ahead <= 1e-6) continue;
            if (!target || ahead < (*target - e) * d) target = r;
        }
        if (target) {
            add_event(t, x, EventKind::slide_start, *target);
            return Phase::sliding(*target);
        }
        add_event(t, x, EventKind::crossing, std::nullopt);
        return Phase::free(-e);
    }

    // The tracked branch folded over (two roots merged and vanished). The
    // layer flow moves lambda away from the fold in the direction of the sign
    // that f1 takes once the roots are gone, i.e. the sign of its curvature.
    Phase fold_jump(double t, const Vec3& x, double lambda_fold) {
        const expr::Bindings at{0.0, x[1], x[2], lambda_fold};
        const double curvature = sys_.d2f1_dlambda2().evaluate(at);
        const double value = f1(x[1], x[2], lambda_fold);
        const double dir_value = curvature != 0.0 ? curvature : value;
        const int d = dir_value > 0.0 ? 1 : -1;
        add_event(t, x, EventKind::fold_jump, lambda_fold);
        traj_.push({t, x, Mode::sliding, lambda_fold});

        std::optional<double> target;
        for (double r : sliding_lambdas(sys_, x[1], x[2])) {
            const double ahead = (r - lambda_fold) * d;
            if (ahead <= 1e-4) continue;
            if (!target || ahead < (*target - lambda_fold) * d) target = r;
        }
        if (target) return Phase::sliding(*target);
        return Phase::free(d);
    }

    // Root of a bracketed scalar function of time.
    template <class G>
    double locate(G&& g, double ta, double tb) const {
        const double ga = g(ta);
        const double gb = g(tb);
        if (gb == 0.0) return tb;
        if (ga == 0.0 || ga * gb > 0.0) return ga == 0.0 ? ta : tb;
        return roots::bracket_root(g, ta, tb, ga, gb);
    }

    const PiecewiseSystem& sys_;
    double t_end_;
    PwsOptions opts_;
    Trajectory traj_;
    std::size_t next_sample_ = 0;
};

}  // namespace

Trajectory integrate_pws(const PiecewiseSystem& sys, const Vec3& x0, double t_end, const PwsOptions& opts) {
    if (!(t_end > 0.0)) throw InputError("t_end must be positive");
    opts.integrator.validate();
    if (!(opts.escape_radius > 0.0)) throw InputError("escape_radius must be positive");
    for (double v : x0) {
        if (!std::isfinite(v)) throw InputError("initial condition must be finite");
    }
    return PwsIntegrator(sys, t_end, opts).run(x0);
}

}  // namespace pwsfold::pws

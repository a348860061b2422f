#include "pwsfold/sim.hpp"

#include "pwsfold/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

namespace pwsfold::sim {

namespace {

constexpr double kLayerWidth = 10.0;

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

}  // namespace

SimResult integrate_smooth(const Field& f, const Vec3& x0, double t_end, const IntegratorOptions& opts,
                           const std::optional<Layer>& layer, double escape) {
    opts.validate();
    if (!(t_end > 0.0)) throw InputError("t_end must be positive");
    if (layer && !(layer->eps > 0.0)) throw InputError("eps must be positive");
    for (double v : x0) {
        if (!std::isfinite(v)) throw InputError("initial condition must be finite");
    }

    DormandPrince<3>::StepCap cap;
    if (layer) {
        const double eps = layer->eps;
        cap = [&f, eps](double t, const Vec3& y) {
            if (std::abs(y[0]) >= kLayerWidth * eps) return std::numeric_limits<double>::infinity();
            const double speed = norm(f(t, y));
            return speed > 0.0 ? eps / speed : std::numeric_limits<double>::infinity();
        };
    }
    auto sample = [&](double t, const Vec3& x) {
        pws::Sample s{t, x, x[0] >= 0.0 ? pws::Mode::free_plus : pws::Mode::free_minus, std::nullopt};
        if (layer && std::abs(x[0]) < kLayerWidth * layer->eps) s.lambda = layer->sigmoid.value(x[0] / layer->eps);
        return s;
    };

    SimResult out;
    DormandPrince<3> stepper(f, 0.0, x0, opts, cap);
    out.trajectory.push(sample(0.0, x0));
    bool armed = !layer || std::abs(x0[0]) >= kLayerWidth * layer->eps;
    auto track = [&](const Vec3& x) {
        for (double v : x) out.sup_norm = std::max(out.sup_norm, std::abs(v));
        if (!layer) return;
        const double a = std::abs(x[0]);
        if (armed && a < kLayerWidth * layer->eps) {
            ++out.layer_entries;
            armed = false;
        } else if (!armed && a > 2.0 * kLayerWidth * layer->eps) {
            armed = true;
        }
    };
    track(x0);

    const double stride = opts.dense_output_stride;
    std::size_t next = 1;
    while (stepper.t() < t_end) {
        stepper.advance(t_end);
        track(stepper.y());
        for (double v : stepper.y()) {
            if (!std::isfinite(v)) throw NumericalError("solution became non-finite at t=" + std::to_string(stepper.t()));
        }
        if (out.sup_norm > escape) {
            out.escaped = true;
            break;
        }
        if (stride > 0.0) {
            for (double ts = static_cast<double>(next) * stride; ts <= stepper.t(); ts = static_cast<double>(++next) * stride) {
                out.trajectory.push(sample(ts, stepper.dense(ts)));
            }
        } else {
            out.trajectory.push(sample(stepper.t(), stepper.y()));
        }
    }
    out.trajectory.push(sample(stepper.t(), stepper.y()));
    out.steps = stepper.accepted_steps();
    return out;
}

SimResult integrate_regularized(const PiecewiseSystem& sys, const Layer& layer, const Vec3& x0, double t_end,
                                const IntegratorOptions& opts, double escape) {
    if (!(layer.eps > 0.0)) throw InputError("eps must be positive");
    Field f = [&sys, layer](double, const Vec3& x) { return reg::regularized_field(sys, layer.sigmoid, layer.eps, x); };
    return integrate_smooth(f, x0, t_end, opts, layer, escape);
}

Example example_from_name(std::string_view name) {
    if (name == "i") return Example::i;
    if (name == "ii") return Example::ii;
    if (name == "iii") return Example::iii;
    throw InputError("unknown example '" + std::string(name) + "' (expected i, ii or iii)");
}

std::string_view to_string(Example e) {
    switch (e) {
        case Example::i: return "i";
        case Example::ii: return "ii";
        case Example::iii: return "iii";
    }
    return "?";
}

SystemText example_text(Example e) {
    switch (e) {
        case Example::i:
            return {{"-x2", "2/5*x1 + 1/10*x2 - 1", "3/10*x2 - 1/5*x2*x3 - 2/5"},
                    {"x3", "1/5*x2*x3 - 3/5", "2/5*x3 - 1 - x1"},
                    {"1/5", "0", "0"}};
        case Example::ii:
            return {{"-x2", "1 + x1", "-7/5"}, {"x3", "-9/10", "1 - 3/5*x1"}, {"1/5", "0", "0"}};
        case Example::iii:
            return {{"-x2 + 1/10*x1", "x1 - 6/5", "x1 - 2"},
                    {"x3 + 1/10*x1", "x1 + 23/100", "1 - x1"},
                    {"1/5", "0", "0"}};
    }
    throw InputError("unknown example");
}

PiecewiseSystem example_system(Example e) {
    const SystemText t = example_text(e);
    return PiecewiseSystem::from_text(t.fplus, t.fminus, t.hidden);
}

SystemText switching_demo_text(bool nonlinear) {
    return {{"-1", "-1", "0"}, {"1", "-1", "0"}, {"0", nonlinear ? "2" : "0", "0"}};
}

PiecewiseSystem switching_demo(bool nonlinear) {
    const SystemText t = switching_demo_text(nonlinear);
    return PiecewiseSystem::from_text(t.fplus, t.fminus, t.hidden);
}

SimResult run_example(Example which, double eps, double t_end, const reg::Sigmoid& s, const Vec3& x0,
                      const IntegratorOptions& opts, double escape) {
    const PiecewiseSystem sys = example_system(which);
    return integrate_regularized(sys, Layer{eps, s}, x0, t_end, opts, escape);
}

Vec3 interpolate(const Trajectory& tr, double t) {
    const auto& s = tr.samples;
    if (s.empty() || t < s.front().t || t > s.back().t) {
        throw InputError("time " + std::to_string(t) + " is outside the trajectory");
    }
    auto it = std::lower_bound(s.begin(), s.end(), t, [](const pws::Sample& a, double v) { return a.t < v; });
    if (it->t == t) return it->x;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double w = (t - lo.t) / (hi.t - lo.t);
    return {lo.x[0] + w * (hi.x[0] - lo.x[0]), lo.x[1] + w * (hi.x[1] - lo.x[1]), lo.x[2] + w * (hi.x[2] - lo.x[2])};
}

double compare_trajectories(const Trajectory& a, const Trajectory& b, const std::vector<double>& t_grid) {
    double worst = 0.0;
    for (double t : t_grid) {
        const Vec3 xa = interpolate(a, t);
        const Vec3 xb = interpolate(b, t);
        worst = std::max(worst, norm({xa[0] - xb[0], xa[1] - xb[1], xa[2] - xb[2]}));
    }
    return worst;
}

std::vector<double> uniform_grid(double t0, double t1, std::size_t n) {
    if (n < 2) throw InputError("grid needs at least 2 points");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = t0 + (t1 - t0) * static_cast<double>(i) / (n - 1);
    g.back() = t1;
    return g;
}

unsigned default_threads() {
    if (const char* env = std::getenv("PWSFOLD_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job, unsigned threads) {
    if (threads == 0) threads = default_threads();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex m;
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(m);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace pwsfold::sim

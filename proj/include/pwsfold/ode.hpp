#pragma once

// Dormand–Prince 5(4) stepper with error-per-step control and Hairer's
// 4th-order continuous extension. Shared by the smooth and the event-driven
// integrators.

#include "pwsfold/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>

namespace pwsfold {

struct IntegratorOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 50'000'000;
    /// Sample spacing of the recorded trajectory; 0 records every accepted step.
    double dense_output_stride = 0.0;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw InputError("tolerances must be positive");
        if (!(max_step > 0.0)) throw InputError("max_step must be positive");
        if (max_steps < 1) throw InputError("max_steps must be at least 1");
        if (!(dense_output_stride >= 0.0)) throw InputError("dense_output_stride must be non-negative");
    }
};

/// Thrown from a right-hand side to make the stepper reject the trial step
/// and retry with a smaller one (e.g. a tracked root branch vanished).
struct RejectStep {};

/// Step size fell below the resolvable limit. `rhs_rejected` is set when the
/// right-hand side refused every trial step rather than the error test.
class StepUnderflow : public NumericalError {
public:
    StepUnderflow(const std::string& what, bool rhs_rejected)
        : NumericalError(what), rhs_rejected_(rhs_rejected) {}
    bool rhs_rejected() const noexcept { return rhs_rejected_; }

private:
    bool rhs_rejected_;
};

template <std::size_t N>
class DormandPrince {
public:
    using State = std::array<double, N>;
    using Rhs = std::function<State(double, const State&)>;
    using StepCap = std::function<double(double, const State&)>;

    DormandPrince(Rhs rhs, double t0, const State& y0, const IntegratorOptions& opts, StepCap cap = {})
        : rhs_(std::move(rhs)), cap_(std::move(cap)), opts_(opts), t_(t0), y_(y0), t_prev_(t0), y_prev_(y0) {
        k1_ = rhs_(t_, y_);
        h_ = initial_step();
    }

    double t() const { return t_; }
    const State& y() const { return y_; }
    double t_prev() const { return t_prev_; }
    const State& y_prev() const { return y_prev_; }
    std::size_t accepted_steps() const { return accepted_; }

    /// Takes one accepted step, never past `t_limit`.
    void advance(double t_limit) {
        bool rhs_rejected = false;
        if (t_limit - t_ <= resolution()) {
            finish_tiny(t_limit);
            return;
        }
        for (;;) {
            double h = std::min(h_, opts_.max_step);
            if (cap_) h = std::min(h, cap_(t_, y_));
            const bool last = t_ + h >= t_limit;
            if (last) h = t_limit - t_;
            if (h < resolution()) {
                throw StepUnderflow("step-size underflow at t=" + std::to_string(t_), rhs_rejected);
            }

            State y_new{};
            State err{};
            try {
                trial(h, y_new, err);
            } catch (const RejectStep&) {
                rhs_rejected = true;
                h_ = 0.25 * h;
                continue;
            }

            double norm = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const double sc = opts_.abs_tol + opts_.rel_tol * std::max(std::abs(y_[i]), std::abs(y_new[i]));
                norm += (err[i] / sc) * (err[i] / sc);
            }
            norm = std::sqrt(norm / static_cast<double>(N));
            if (!std::isfinite(norm)) {
                h_ = 0.25 * h;
                continue;
            }

            const double fac = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
            if (norm <= 1.0) {
                if (++accepted_ > opts_.max_steps) {
                    throw NumericalError("step budget exceeded (" + std::to_string(opts_.max_steps) + " steps)");
                }
                build_dense(h, y_new);
                t_prev_ = t_;
                y_prev_ = y_;
                t_ = last ? t_limit : t_ + h;
                y_ = y_new;
                k1_ = k7_;
                if (!last || fac < 1.0) h_ = h * fac;
                return;
            }
            h_ = h * std::min(1.0, fac);
        }
    }

    /// Continuous extension on [t_prev, t].
    State dense(double t) const {
        const double h = t_ - t_prev_;
        if (h == 0.0) return y_;
        const double th = (t - t_prev_) / h;
        const double th1 = 1.0 - th;
        State out{};
        for (std::size_t i = 0; i < N; ++i) {
            out[i] = r1_[i] + th * (r2_[i] + th1 * (r3_[i] + th * (r4_[i] + th1 * r5_[i])));
        }
        return out;
    }

private:
    double resolution() const { return 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t_)); }

    // Remainder below the time resolution: one Euler step with linear dense output.
    void finish_tiny(double t_limit) {
        const double h = t_limit - t_;
        State y_new{};
        for (std::size_t i = 0; i < N; ++i) y_new[i] = y_[i] + h * k1_[i];
        for (std::size_t i = 0; i < N; ++i) {
            r1_[i] = y_[i];
            r2_[i] = y_new[i] - y_[i];
            r3_[i] = r4_[i] = r5_[i] = 0.0;
        }
        t_prev_ = t_;
        y_prev_ = y_;
        t_ = t_limit;
        y_ = y_new;
        try {
            k1_ = rhs_(t_, y_);
        } catch (const RejectStep&) {
        }
        ++accepted_;
    }

    double initial_step() {
        double d0 = 0.0;
        double d1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = opts_.abs_tol + opts_.rel_tol * std::abs(y_[i]);
            d0 += (y_[i] / sc) * (y_[i] / sc);
            d1 += (k1_[i] / sc) * (k1_[i] / sc);
        }
        d0 = std::sqrt(d0 / N);
        d1 = std::sqrt(d1 / N);
        double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        return std::min(h, opts_.max_step);
    }

    void trial(double h, State& y_new, State& err) {
        constexpr double a21 = 1.0 / 5.0;
        constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
        constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
        constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                         a54 = -212.0 / 729.0;
        constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                         a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
        constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                         b6 = 11.0 / 84.0;
        constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                         e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

        State s{};
        auto stage = [&](auto&& combine) {
            for (std::size_t i = 0; i < N; ++i) s[i] = y_[i] + h * combine(i);
            return s;
        };
        k2_ = rhs_(t_ + h / 5.0, stage([&](std::size_t i) { return a21 * k1_[i]; }));
        k3_ = rhs_(t_ + 3.0 * h / 10.0, stage([&](std::size_t i) { return a31 * k1_[i] + a32 * k2_[i]; }));
        k4_ = rhs_(t_ + 4.0 * h / 5.0,
                   stage([&](std::size_t i) { return a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]; }));
        k5_ = rhs_(t_ + 8.0 * h / 9.0, stage([&](std::size_t i) {
                       return a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i];
                   }));
        k6_ = rhs_(t_ + h, stage([&](std::size_t i) {
                       return a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] + a65 * k5_[i];
                   }));
        y_new = stage([&](std::size_t i) {
            return b1 * k1_[i] + b3 * k3_[i] + b4 * k4_[i] + b5 * k5_[i] + b6 * k6_[i];
        });
        k7_ = rhs_(t_ + h, y_new);
        for (std::size_t i = 0; i < N; ++i) {
            err[i] = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] + e7 * k7_[i]);
        }
    }

    void build_dense(double h, const State& y_new) {
        constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                         d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                         d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double ydiff = y_new[i] - y_[i];
            const double bspl = h * k1_[i] - ydiff;
            r1_[i] = y_[i];
            r2_[i] = ydiff;
            r3_[i] = bspl;
            r4_[i] = ydiff - h * k7_[i] - bspl;
            r5_[i] = h * (d1 * k1_[i] + d3 * k3_[i] + d4 * k4_[i] + d5 * k5_[i] + d6 * k6_[i] + d7 * k7_[i]);
        }
    }

    Rhs rhs_;
    StepCap cap_;
    IntegratorOptions opts_;
    double t_;
    State y_;
    double t_prev_;
    State y_prev_;
    double h_ = 0.0;
    std::size_t accepted_ = 0;
    State k1_{}, k2_{}, k3_{}, k4_{}, k5_{}, k6_{}, k7_{};
    State r1_{}, r2_{}, r3_{}, r4_{}, r5_{};
};

}  // namespace pwsfold

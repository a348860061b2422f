#pragma once

// Adaptive integration of smooth (regularized) fields, the built-in example
// systems and trajectory comparison.

#include "pwsfold/ode.hpp"
#include "pwsfold/pws.hpp"
#include "pwsfold/regularize.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace pwsfold::sim {

using pws::PiecewiseSystem;
using pws::Trajectory;
using pws::Vec3;

using Field = std::function<Vec3(double, const Vec3&)>;

/// Transition layer of a regularized field: |x1| < 10 eps. Inside it the step
/// is capped at eps / |f| and lambda = phi(x1 / eps) is recorded.
struct Layer {
    double eps = 1e-4;
    reg::Sigmoid sigmoid{};
};

struct SimResult {
    Trajectory trajectory;
    std::size_t steps = 0;
    /// Passages into |x1| < 10 eps (re-armed once |x1| exceeds 20 eps).
    std::size_t layer_entries = 0;
    /// max |x_i| over all accepted steps.
    double sup_norm = 0.0;
    /// Set when the run stopped early because sup_norm exceeded the escape radius.
    bool escaped = false;
};

inline constexpr double kNoEscape = std::numeric_limits<double>::infinity();

/// `escape`: stop (without error) once some |x_i| exceeds it.
SimResult integrate_smooth(const Field& f, const Vec3& x0, double t_end, const IntegratorOptions& opts = {},
                           const std::optional<Layer>& layer = std::nullopt, double escape = kNoEscape);

/// integrate_smooth on combination(sys, x, phi(x1 / eps)).
SimResult integrate_regularized(const PiecewiseSystem& sys, const Layer& layer, const Vec3& x0, double t_end,
                                const IntegratorOptions& opts = {}, double escape = kNoEscape);

enum class Example { i, ii, iii };

/// "i", "ii" or "iii"; InputError otherwise.
Example example_from_name(std::string_view name);
std::string_view to_string(Example e);

/// Component expressions of the example systems, hidden term (1/5, 0, 0).
struct SystemText {
    std::array<std::string_view, 3> fplus;
    std::array<std::string_view, 3> fminus;
    std::array<std::string_view, 3> hidden;
};

SystemText example_text(Example e);
PiecewiseSystem example_system(Example e);

/// The planar switching demo lifted to 3D: f+ = (-1, -1, 0), f- = (1, -1, 0)
/// with g = 0 (linear) or g = (0, 2, 0) (nonlinear).
SystemText switching_demo_text(bool nonlinear);
PiecewiseSystem switching_demo(bool nonlinear);

inline constexpr Vec3 kDefaultExampleStart{0.1, 0.1, 0.1};

SimResult run_example(Example which, double eps, double t_end, const reg::Sigmoid& s,
                      const Vec3& x0 = kDefaultExampleStart, const IntegratorOptions& opts = {},
                      double escape = kNoEscape);

/// State at time t by linear interpolation between samples.
Vec3 interpolate(const Trajectory& tr, double t);

/// sup over the grid of the Euclidean distance between the interpolated
/// states. InputError when a grid time lies outside either trajectory.
double compare_trajectories(const Trajectory& a, const Trajectory& b, const std::vector<double>& t_grid);

std::vector<double> uniform_grid(double t0, double t1, std::size_t n);

/// Runs jobs on up to `threads` threads (PWSFOLD_THREADS when 0, else hardware).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& job, unsigned threads = 0);

unsigned default_threads();

}  // namespace pwsfold::sim

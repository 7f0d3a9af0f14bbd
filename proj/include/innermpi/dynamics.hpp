#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "innermpi/hierarchy.hpp"
#include "innermpi/semialgebraic.hpp"

namespace innermpi {

inline constexpr double kDefaultStep = 1e-3;
inline constexpr double kExitTimeTolerance = 1e-10;
inline constexpr double kDefaultExitHorizon = 50.0;

/// One classic Runge-Kutta step of size h from x.
void rk4_step(const OdeSystem& system, std::span<const double> x, double h, std::span<double> out);

enum class TrajectoryOutcome { ExitedAt, StayedUntilHorizon };

struct TrajectoryResult {
  TrajectoryOutcome outcome = TrajectoryOutcome::StayedUntilHorizon;
  /// Exit time, or the horizon.
  double time = 0.0;
  /// Exit point, or the state at the horizon.
  Point point;
  /// States at the requested sample times that precede the exit.
  std::vector<double> sample_times;
  std::vector<Point> samples;
  /// max(0, -min_i g_i) over every accepted state.
  double max_violation = 0.0;

  bool exited() const { return outcome == TrajectoryOutcome::ExitedAt; }
};

/// Called with (t, x(t)) at t = 0, after every accepted step, and at the exit point.
using TrajectoryObserver = std::function<void(double, std::span<const double>)>;

/// Fixed-step RK4 until the trajectory leaves int(X) or the horizon is
/// reached. The crossing is located by bisection on a partial step until
/// the bracket is below kExitTimeTolerance and |min_i g_i| <= tol_b.
TrajectoryResult integrate(const OdeSystem& system, const SemialgebraicSet& X, std::span<const double> x0,
                           double horizon, double step = kDefaultStep, std::span<const double> sample_times = {},
                           const TrajectoryObserver& observer = {});

struct ExitTimeEstimate {
  double tau_bar = 0.0;
  double std_error = 0.0;
  /// Share of samples still inside at the horizon.
  double censored_fraction = 0.0;
  /// Share of samples exiting in the second half of the horizon.
  double late_exit_fraction = 0.0;
  std::size_t samples = 0;
  double horizon = 0.0;
  std::uint64_t seed = 0;

  bool censoring_flagged() const { return censored_fraction > 0.01; }
};

/// tau_bar = (1/lambda(X)) * integral of tau over the escaping region, by
/// uniform sampling of X (rejection from the ball constraint). Non-exiting
/// samples contribute 0 and count in the normalization.
ExitTimeEstimate estimate_avg_exit_time(const OdeSystem& system, const SemialgebraicSet& X, std::size_t samples,
                                        double horizon, std::uint64_t seed, double step = kDefaultStep,
                                        int workers = 8);

/// 2 tau_bar. Throws when no sample exits or when more than 1% of the
/// samples exit in the second half of the horizon (the estimate is still
/// moving with the horizon).
double auto_time_bound(const ExitTimeEstimate& estimate);

}  // namespace innermpi

#include "innermpi/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace innermpi {

void rk4_step(const OdeSystem& system, std::span<const double> x, double h, std::span<double> out) {
  const std::size_t n = x.size();
  // Stack scratch for small systems; this sits in the innermost simulation loop.
  constexpr std::size_t kStack = 8;
  double stack[5 * kStack];
  std::vector<double> heap;
  double* buf = stack;
  if (n > kStack) {
    heap.resize(5 * n);
    buf = heap.data();
  }
  const std::span<double> k1(buf, n), k2(buf + n, n), k3(buf + 2 * n, n), k4(buf + 3 * n, n), tmp(buf + 4 * n, n);
  system.eval(x, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
  system.eval(tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
  system.eval(tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
  system.eval(tmp, k4);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

namespace {

void require_finite(std::span<const double> x, double t) {
  for (double v : x) {
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "integrate: state became non-finite at t = " << t;
      throw std::runtime_error(os.str());
    }
  }
}

}  // namespace

TrajectoryResult integrate(const OdeSystem& system, const SemialgebraicSet& X, std::span<const double> x0,
                           double horizon, double step, std::span<const double> sample_times,
                           const TrajectoryObserver& observer) {
  const int n = system.dimension();
  if (static_cast<int>(x0.size()) != n || X.dimension() != n) {
    throw std::invalid_argument("integrate: dimension mismatch");
  }
  if (!(step > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("integrate: step and horizon must be positive");
  if (X.contains(x0) != Membership::Interior) throw std::invalid_argument("integrate: initial state is not in int(X)");
  if (!std::is_sorted(sample_times.begin(), sample_times.end())) {
    throw std::invalid_argument("integrate: sample times must be sorted");
  }

  TrajectoryResult res;
  Point x(x0.begin(), x0.end()), next(n), probe(n);
  double t = 0.0;
  std::size_t si = 0;
  const double tol_b = X.boundary_tolerance();
  if (observer) observer(t, x);

  auto record_samples_until = [&](double t_end) {
    while (si < sample_times.size() && sample_times[si] <= t_end) {
      const double ts = sample_times[si++];
      if (ts < t) continue;
      rk4_step(system, x, ts - t, probe);
      res.sample_times.push_back(ts);
      res.samples.push_back(probe);
    }
  };

  while (t < horizon) {
    const double h = std::min(step, horizon - t);
    rk4_step(system, x, h, next);
    require_finite(next, t + h);
    const double g = X.min_constraint(next);
    if (g > 0.0) {
      record_samples_until(t + h);
      x.swap(next);
      t += h;
      if (t >= horizon - 1e-12 * std::max(1.0, horizon)) t = horizon;
      if (observer) observer(t, x);
      continue;
    }
    // Crossing in (t, t + h]: min g > 0 at lo, <= 0 at hi.
    double lo = 0.0, hi = h;
    Point at_hi = next;
    double g_hi = g;
    for (int it = 0; it < 200; ++it) {
      if (hi - lo <= kExitTimeTolerance && std::abs(g_hi) <= tol_b) break;
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      rk4_step(system, x, mid, probe);
      const double gm = X.min_constraint(probe);
      if (gm > 0.0) {
        lo = mid;
      } else {
        hi = mid;
        at_hi = probe;
        g_hi = gm;
      }
    }
    record_samples_until(t + lo);
    res.outcome = TrajectoryOutcome::ExitedAt;
    res.time = t + hi;
    res.point = at_hi;
    res.max_violation = std::max(res.max_violation, std::max(0.0, -g_hi));
    if (observer) observer(res.time, res.point);
    return res;
  }
  record_samples_until(horizon);
  res.time = horizon;
  res.point = x;
  return res;
}

ExitTimeEstimate estimate_avg_exit_time(const OdeSystem& system, const SemialgebraicSet& X, std::size_t samples,
                                        double horizon, std::uint64_t seed, double step, int workers) {
  if (!X.ball_index()) throw std::invalid_argument("estimate_avg_exit_time: X needs a ball constraint");
  if (samples == 0) throw std::invalid_argument("estimate_avg_exit_time: zero samples");
  if (!(horizon > 0.0)) throw std::invalid_argument("estimate_avg_exit_time: horizon must be positive");
  const int n = X.dimension();
  const double R = X.ball_radius();
  const auto schedule = WorkerSchedule::split(samples, seed, workers);
  const std::size_t nw = schedule.counts.size();

  struct Tally {
    std::size_t accepted = 0, censored = 0, late = 0;
    double sum = 0.0, sum2 = 0.0;
  };
  std::vector<Tally> tallies(nw);

  for_each_worker(nw, [&](std::size_t w) {
    BallSampler sampler(n, R, schedule.seed_for(w));
    Tally& tl = tallies[w];
    Point x(n);
    const std::size_t want = schedule.counts[w];
    const std::size_t max_draws = 1000 * std::max<std::size_t>(want, 1);
    for (std::size_t draws = 0; tl.accepted < want && draws < max_draws; ++draws) {
      sampler.draw(x);
      if (X.contains(x) != Membership::Interior) continue;
      ++tl.accepted;
      const TrajectoryResult tr = integrate(system, X, x, horizon, step);
      if (!tr.exited()) {
        ++tl.censored;
        continue;
      }
      if (tr.time > 0.5 * horizon) ++tl.late;
      tl.sum += tr.time;
      tl.sum2 += tr.time * tr.time;
    }
  });

  Tally all;
  for (const Tally& tl : tallies) {
    all.accepted += tl.accepted;
    all.censored += tl.censored;
    all.late += tl.late;
    all.sum += tl.sum;
    all.sum2 += tl.sum2;
  }
  if (all.accepted == 0) throw std::runtime_error("estimate_avg_exit_time: no sample fell in int(X)");

  ExitTimeEstimate est;
  const double N = static_cast<double>(all.accepted);
  est.samples = all.accepted;
  est.horizon = horizon;
  est.seed = seed;
  est.tau_bar = all.sum / N;
  const double var = std::max(0.0, all.sum2 / N - est.tau_bar * est.tau_bar);
  est.std_error = all.accepted > 1 ? std::sqrt(var / (N - 1.0)) : 0.0;
  est.censored_fraction = static_cast<double>(all.censored) / N;
  est.late_exit_fraction = static_cast<double>(all.late) / N;
  return est;
}

double auto_time_bound(const ExitTimeEstimate& estimate) {
  if (!(estimate.tau_bar > 0.0)) {
    throw std::runtime_error(
        "time bound selection: no sampled trajectory leaves X within the horizon; "
        "pass an explicit time bound or use forced mode");
  }
  if (estimate.late_exit_fraction > 0.01) {
    std::ostringstream os;
    os << "time bound selection: " << 100.0 * estimate.late_exit_fraction
       << "% of the samples exit in the second half of the horizon " << estimate.horizon
       << "; the average exit time has not converged, pass an explicit time bound";
    throw std::runtime_error(os.str());
  }
  return 2.0 * estimate.tau_bar;
}

}  // namespace innermpi

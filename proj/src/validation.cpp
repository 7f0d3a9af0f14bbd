#include "innermpi/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace innermpi {

namespace {

// Independent seed streams derived from the single configured seed.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

enum Stream : std::uint64_t { kResidualStream, kBoundaryStream, kInvarianceStream, kVolumeStream, kHorizonStream };

void require_ball(const SemialgebraicSet& X, const char* who) {
  if (!X.ball_index()) throw std::invalid_argument(std::string(who) + ": X needs a ball constraint");
}

// Uniform interior points by rejection from the ball, stopping after
// 1000 draws per requested point.
std::vector<Point> interior_points(const SemialgebraicSet& X, std::size_t count, std::uint64_t seed) {
  BallSampler sampler(X.dimension(), X.ball_radius(), seed);
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t draws = 0; out.size() < count && draws < 1000 * count; ++draws) {
    Point x = sampler.draw();
    if (X.contains(x) == Membership::Interior) out.push_back(std::move(x));
  }
  return out;
}

VolumeEstimate volume_from_counts(std::size_t hits, std::size_t samples, const SemialgebraicSet& X) {
  VolumeEstimate e;
  e.samples = samples;
  const double vol = ball_volume(X.dimension(), X.ball_radius());
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  e.value = vol * p;
  e.std_error = vol * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  return e;
}

template <class Hit>
VolumeEstimate monte_carlo_volume(const SemialgebraicSet& X, std::size_t samples, std::uint64_t seed, int workers,
                                  const Hit& hit) {
  require_ball(X, "volume estimate");
  if (samples == 0) throw std::invalid_argument("volume estimate: zero samples");
  const auto schedule = WorkerSchedule::split(samples, seed, workers);
  std::vector<std::size_t> hits(schedule.counts.size(), 0);
  for_each_worker(schedule.counts.size(), [&](std::size_t w) {
    BallSampler sampler(X.dimension(), X.ball_radius(), schedule.seed_for(w));
    Point x(X.dimension());
    for (std::size_t s = 0; s < schedule.counts[w]; ++s) {
      sampler.draw(x);
      if (X.contains(x) == Membership::Interior && hit(x)) ++hits[w];
    }
  });
  std::size_t total = 0;
  for (auto h : hits) total += h;
  return volume_from_counts(total, samples, X);
}

ResidualSummary residual(const std::string& name, const CompiledPolynomial& p, const std::vector<Point>& pts,
                         double tolerance) {
  ResidualSummary r;
  r.name = name;
  r.samples = pts.size();
  r.tolerance = tolerance;
  r.min_value = pts.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (const auto& x : pts) r.min_value = std::min(r.min_value, p(x));
  return r;
}

struct TrajectoryCheck {
  bool exit_failure = false;
  bool descent_failure = false;
  double descent_violation = 0.0;
};

// Interior is required while v(x0) + u t < 0; v(x(t)) <= v(x0) + u t + tol throughout.
TrajectoryCheck check_trajectory(const OdeSystem& system, const SemialgebraicSet& X, const CompiledPolynomial& v,
                                 double u, const Point& x0, double horizon, double step, double tol) {
  TrajectoryCheck c;
  const double v0 = v(x0);
  const double claim_until = u > 0.0 ? -v0 / u : std::numeric_limits<double>::infinity();
  auto observe = [&](double t, std::span<const double> x) {
    const double excess = v(x) - v0 - u * t;
    c.descent_violation = std::max(c.descent_violation, excess);
    if (excess > tol) c.descent_failure = true;
    if (t < claim_until && X.contains(x) != Membership::Interior) c.exit_failure = true;
  };
  const TrajectoryResult tr = integrate(system, X, x0, horizon, step, {}, observe);
  if (tr.exited() && tr.time < claim_until) c.exit_failure = true;
  return c;
}

}  // namespace

bool ValidationReport::residuals_passed() const {
  return std::all_of(residuals.begin(), residuals.end(), [](const ResidualSummary& r) { return r.passed(); });
}

bool ValidationReport::finite_horizon_passed() const {
  return std::all_of(finite_horizon.begin(), finite_horizon.end(),
                     [](const FiniteHorizonSummary& f) { return f.failures == 0; });
}

double certificate_scale(const Certificate& cert) {
  return 1.0 + std::max({cert.v.max_abs_coefficient(), cert.w.max_abs_coefficient(), std::abs(cert.u)});
}

double validation_margin(const Certificate& cert) { return 1e-3 * (1.0 + cert.v.max_abs_coefficient()); }

VolumeEstimate inner_set_volume(const Polynomial& v, const SemialgebraicSet& X, std::size_t samples,
                                std::uint64_t seed, int workers) {
  const CompiledPolynomial cv(v);
  return monte_carlo_volume(X, samples, seed, workers, [&](const Point& x) { return cv(x) < 0.0; });
}

VolumeEstimate symmetric_difference_volume(const Polynomial& va, const Polynomial& vb, const SemialgebraicSet& X,
                                           std::size_t samples, std::uint64_t seed, int workers) {
  const CompiledPolynomial a(va), b(vb);
  return monte_carlo_volume(X, samples, seed, workers, [&](const Point& x) { return (a(x) < 0.0) != (b(x) < 0.0); });
}

ValidationReport validate_certificate(const Certificate& cert, const OdeSystem& system, const SemialgebraicSet& X,
                                      const ValidationConfig& config) {
  require_ball(X, "validate_certificate");
  if (system.dimension() != X.dimension() || cert.v.dimension() != X.dimension()) {
    throw std::invalid_argument("validate_certificate: dimension mismatch");
  }
  ValidationReport rep;
  rep.k = cert.k;
  rep.mode = cert.mode;
  rep.seed = config.seed;
  rep.scale = certificate_scale(cert);
  rep.margin = validation_margin(cert);
  rep.invariance.horizon = config.horizon_for(cert.T);

  // (a) residuals of the four identities at sampled points.
  const double tol = -1e-6 * rep.scale;
  const int n = X.dimension();
  const auto inner = interior_points(X, config.interior_samples, stream_seed(config.seed, kResidualStream));
  const Polynomial one = Polynomial::constant(n, 1.0);
  const Polynomial lie = Polynomial::constant(n, cert.u) - lie_derivative(cert.v, system.field());
  rep.residuals.push_back(residual("u - grad(v).f", CompiledPolynomial(lie), inner, tol));
  rep.residuals.push_back(residual("w - v - 1", CompiledPolynomial(cert.w - cert.v - one), inner, tol));
  rep.residuals.push_back(residual("w", CompiledPolynomial(cert.w), inner, tol));
  if (config.boundary_samples > 0) {
    const auto boundary = X.sample_boundary(static_cast<int>(config.boundary_samples),
                                            stream_seed(config.seed, kBoundaryStream));
    rep.residuals.push_back(residual("v on boundary", CompiledPolynomial(cert.v), boundary, tol));
  }

  const CompiledPolynomial cv(cert.v);
  const std::size_t workers = static_cast<std::size_t>(std::max(1, config.workers));
  rep.raw_volume = inner_set_volume(cert.v, X, config.volume_samples, stream_seed(config.seed, kVolumeStream),
                                    config.workers);
  rep.vacuous = cert.degenerate || rep.raw_volume.value == 0.0;
  if (rep.vacuous) return rep;
  rep.volume = rep.raw_volume;

  // (b) invariance of the member points under the flow.
  {
    BallSampler sampler(n, X.ball_radius(), stream_seed(config.seed, kInvarianceStream));
    std::vector<Point> members;
    const std::size_t want = config.invariance_samples;
    for (std::size_t draws = 0; members.size() < want && draws < 200 * std::max<std::size_t>(want, 1); ++draws) {
      Point x = sampler.draw();
      if (inner_set_membership(cert, X, x) && cv(x) < -rep.margin) members.push_back(std::move(x));
    }
    std::vector<TrajectoryCheck> checks(members.size());
    for_each_worker(workers, [&](std::size_t w) {
      for (std::size_t i = w; i < members.size(); i += workers) {
        checks[i] = check_trajectory(system, X, cv, cert.u, members[i], rep.invariance.horizon, config.step,
                                     config.descent_tolerance);
      }
    });
    auto& inv = rep.invariance;
    inv.tested = members.size();
    for (std::size_t i = 0; i < members.size(); ++i) {
      inv.exit_failures += checks[i].exit_failure;
      inv.descent_failures += checks[i].descent_failure;
      inv.max_descent_violation = std::max(inv.max_descent_violation, checks[i].descent_violation);
      double r2 = 0.0;
      for (double c : members[i]) r2 += c * c;
      inv.max_member_norm = std::max(inv.max_member_norm, std::sqrt(r2));
    }
  }

  // (d) X̂_t = {v + u t < 0} stays in int(X) up to time t.
  if (cert.mode == CertificateMode::SlackU && cert.u > 0.0) {
    std::vector<double> horizons = config.finite_horizons;
    if (horizons.empty()) horizons.push_back(cert.T);
    std::uint64_t stream = kHorizonStream;
    for (double t : horizons) {
      BallSampler sampler(n, X.ball_radius(), stream_seed(config.seed, stream++));
      std::vector<Point> pts;
      const std::size_t want = config.finite_horizon_samples;
      for (std::size_t draws = 0; pts.size() < want && draws < 200 * std::max<std::size_t>(want, 1); ++draws) {
        Point x = sampler.draw();
        if (inner_set_membership(cert, X, x, t) && cv(x) + cert.u * t < -rep.margin) pts.push_back(std::move(x));
      }
      std::vector<char> failed(pts.size(), 0);
      for_each_worker(workers, [&](std::size_t w) {
        for (std::size_t i = w; i < pts.size(); i += workers) {
          failed[i] = integrate(system, X, pts[i], t, config.step).exited();
        }
      });
      FiniteHorizonSummary fh;
      fh.t = t;
      fh.tested = pts.size();
      fh.failures = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
      rep.finite_horizon.push_back(fh);
    }
  }
  return rep;
}

namespace {

nlohmann::json volume_json(const VolumeEstimate& v) {
  return {{"value", v.value}, {"std_error", v.std_error}, {"samples", v.samples}};
}

}  // namespace

nlohmann::json validation_to_json(const ValidationReport& r) {
  nlohmann::json j;
  j["format"] = "innermpi-validation";
  j["version"] = 1;
  j["k"] = r.k;
  j["mode"] = to_string(r.mode);
  j["seed"] = r.seed;
  j["scale"] = r.scale;
  j["margin"] = r.margin;
  j["vacuous"] = r.vacuous;
  nlohmann::json res = nlohmann::json::array();
  for (const auto& s : r.residuals) {
    res.push_back({{"name", s.name},
                   {"samples", s.samples},
                   {"min", s.min_value},
                   {"tolerance", s.tolerance},
                   {"passed", s.passed()}});
  }
  j["residuals"] = res;
  j["invariance"] = {{"tested", r.invariance.tested},
                     {"exit_failures", r.invariance.exit_failures},
                     {"descent_failures", r.invariance.descent_failures},
                     {"max_descent_violation", r.invariance.max_descent_violation},
                     {"max_member_norm", r.invariance.max_member_norm},
                     {"horizon", r.invariance.horizon},
                     {"passed", r.invariance_passed()}};
  nlohmann::json fh = nlohmann::json::array();
  for (const auto& f : r.finite_horizon) fh.push_back({{"t", f.t}, {"tested", f.tested}, {"failures", f.failures}});
  j["finite_horizon"] = fh;
  j["volume"] = volume_json(r.volume);
  j["raw_volume"] = volume_json(r.raw_volume);
  if (r.exit_time) {
    const auto& e = *r.exit_time;
    j["exit_time"] = {{"tau_bar", e.tau_bar},
                      {"std_error", e.std_error},
                      {"censored_fraction", e.censored_fraction},
                      {"censoring_flagged", e.censoring_flagged()},
                      {"late_exit_fraction", e.late_exit_fraction},
                      {"samples", e.samples},
                      {"horizon", e.horizon},
                      {"seed", e.seed}};
  }
  return j;
}

}  // namespace innermpi

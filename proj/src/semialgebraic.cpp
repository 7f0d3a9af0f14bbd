#include "innermpi/semialgebraic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace innermpi {

const char* to_string(Membership m) {
  switch (m) {
    case Membership::Interior: return "interior";
    case Membership::Boundary: return "boundary";
    case Membership::Outside: return "outside";
  }
  return "unknown";
}

std::optional<double> ball_radius_of(const Polynomial& g) {
  const int n = g.dimension();
  if (n == 0 || g.size() != static_cast<std::size_t>(n) + 1) return std::nullopt;
  double r2 = g.coefficient(Monomial::one(n));
  if (!(r2 > 0.0)) return std::nullopt;
  for (int j = 0; j < n; ++j) {
    std::vector<int> e(n, 0);
    e[j] = 2;
    if (g.coefficient(Monomial(std::move(e))) != -1.0) return std::nullopt;
  }
  return std::sqrt(r2);
}

double ball_volume(int n, double radius) {
  return std::pow(std::numbers::pi, 0.5 * n) * std::pow(radius, n) / std::tgamma(0.5 * n + 1.0);
}

SemialgebraicSet::SemialgebraicSet(std::vector<Polynomial> constraints, double boundary_tolerance)
    : constraints_(std::move(constraints)), boundary_tol_(boundary_tolerance) {
  if (constraints_.empty()) throw std::invalid_argument("SemialgebraicSet: at least one constraint required");
  if (!(boundary_tol_ >= 0.0)) throw std::invalid_argument("SemialgebraicSet: negative boundary tolerance");
  n_ = constraints_.front().dimension();
  if (n_ <= 0) throw std::invalid_argument("SemialgebraicSet: dimension must be positive");
  for (std::size_t i = 0; i < constraints_.size(); ++i) {
    const Polynomial& g = constraints_[i];
    if (g.dimension() != n_) throw std::invalid_argument("SemialgebraicSet: constraint dimension mismatch");
    if (g.is_zero()) throw std::invalid_argument("SemialgebraicSet: zero constraint polynomial");
    const int d = g.total_degree();
    degrees_.push_back(d);
    half_degrees_.push_back((d + 1) / 2);
    k_min_ = std::max(k_min_, half_degrees_.back());
    compiled_.emplace_back(g);
    if (!ball_index_) {
      if (auto r = ball_radius_of(g)) {
        ball_index_ = i;
        ball_radius_ = *r;
      }
    }
  }
}

double SemialgebraicSet::min_constraint(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_) throw std::invalid_argument("SemialgebraicSet: dimension mismatch");
  double m = std::numeric_limits<double>::infinity();
  for (const auto& g : compiled_) m = std::min(m, g.eval(x));
  return m;
}

Membership SemialgebraicSet::contains(std::span<const double> x) const {
  const double m = min_constraint(x);
  if (m > boundary_tol_) return Membership::Interior;
  if (m >= -boundary_tol_) return Membership::Boundary;
  return Membership::Outside;
}

SemialgebraicSet SemialgebraicSet::ensure_ball_constraint(double radius) const {
  if (!(radius > 0.0)) throw std::invalid_argument("ensure_ball_constraint: radius must be positive");
  if (ball_index_) return *this;
  std::vector<Polynomial> gs = constraints_;
  Polynomial ball = Polynomial::constant(n_, radius * radius);
  for (int j = 0; j < n_; ++j) {
    std::vector<int> e(n_, 0);
    e[j] = 2;
    ball -= Polynomial::monomial(Monomial(std::move(e)));
  }
  gs.push_back(std::move(ball));
  return SemialgebraicSet(std::move(gs), boundary_tol_);
}

Point SemialgebraicSet::find_interior_anchor(std::mt19937_64& rng, int max_tries) const {
  Point origin(n_, 0.0);
  if (contains(origin) == Membership::Interior) return origin;
  const double radius = ball_index_ ? ball_radius_ : 10.0;
  std::uniform_real_distribution<double> u(-radius, radius);
  Point p(n_);
  for (int t = 0; t < max_tries; ++t) {
    for (auto& c : p) c = u(rng);
    if (contains(p) == Membership::Interior) return p;
  }
  throw std::runtime_error("SemialgebraicSet: could not locate an interior point");
}

std::vector<Point> SemialgebraicSet::sample_boundary(int count, std::uint64_t seed) const {
  if (count < 1) throw std::invalid_argument("sample_boundary: count must be at least 1");
  std::mt19937_64 rng(seed);
  const Point anchor = find_interior_anchor(rng);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double max_reach = ball_index_ ? 4.0 * ball_radius_ + 1.0 : 1e6;

  auto at = [&](const Point& dir, double t) {
    Point p(n_);
    for (int j = 0; j < n_; ++j) p[j] = anchor[j] + t * dir[j];
    return p;
  };

  std::vector<Point> out;
  out.reserve(count);
  int failures = 0;
  while (static_cast<int>(out.size()) < count) {
    if (failures > 1000 * count) throw std::runtime_error("sample_boundary: no boundary crossing found");
    Point dir(n_);
    double norm = 0.0;
    for (auto& c : dir) {
      c = normal(rng);
      norm += c * c;
    }
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    for (auto& c : dir) c /= norm;

    // March outward until some g_i is negative.
    double lo = 0.0, hi = 0.0;
    double step = ball_index_ ? 0.25 * ball_radius_ : 0.5;
    bool found = false;
    for (double t = step; t <= max_reach; t += step) {
      if (min_constraint(at(dir, t)) < 0.0) {
        hi = t;
        found = true;
        break;
      }
      lo = t;
      if (!ball_index_) step *= 2.0;
    }
    if (!found) {
      ++failures;
      continue;
    }
    // lo may have crossed a thin excursion outside X; restart from the anchor
    // side so that h(lo) > 0 and h(hi) < 0 bracket a crossing.
    if (min_constraint(at(dir, lo)) <= 0.0) lo = 0.0;
    Point p;
    bool ok = false;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      p = at(dir, mid);
      const double h = min_constraint(p);
      if (std::abs(h) <= boundary_tol_) {
        ok = true;
        break;
      }
      (h > 0.0 ? lo : hi) = mid;
    }
    if (ok && contains(p) == Membership::Boundary) {
      out.push_back(std::move(p));
    } else {
      ++failures;
    }
  }
  return out;
}

void BallSampler::draw(std::span<double> out) {
  double norm = 0.0;
  do {
    norm = 0.0;
    for (int j = 0; j < n_; ++j) {
      out[j] = normal_(rng_);
      norm += out[j] * out[j];
    }
  } while (norm == 0.0);
  const double r = radius_ * std::pow(uniform_(rng_), 1.0 / n_) / std::sqrt(norm);
  for (int j = 0; j < n_; ++j) out[j] *= r;
}

WorkerSchedule WorkerSchedule::split(std::size_t total, std::uint64_t seed, int workers) {
  if (workers < 1) workers = 1;
  WorkerSchedule s;
  s.base_seed = seed;
  s.counts.assign(static_cast<std::size_t>(workers), total / workers);
  for (std::size_t j = 0; j < total % workers; ++j) ++s.counts[j];
  return s;
}

void for_each_worker(std::size_t workers, const std::function<void(std::size_t)>& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (hw == 1 || workers <= 1) {
    for (std::size_t j = 0; j < workers; ++j) fn(j);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  std::size_t next = 0;
  while (next < workers) {
    threads.clear();
    for (unsigned t = 0; t < hw && next < workers; ++t, ++next) {
      threads.emplace_back([&, j = next] {
        try {
          fn(j);
        } catch (...) {
          errors[j] = std::current_exception();
        }
      });
    }
    for (auto& th : threads) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace innermpi

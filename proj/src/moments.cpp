#include "innermpi/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace innermpi {

namespace {

// Exponent vectors of exact degree d in descending lexicographic order.
void exponents_of_degree(int n, int d, int pos, std::vector<int>& current, std::vector<Monomial>& out) {
  if (pos == n - 1) {
    current[pos] = d;
    out.emplace_back(current);
    return;
  }
  for (int e = d; e >= 0; --e) {
    current[pos] = e;
    exponents_of_degree(n, d - e, pos + 1, current, out);
  }
  current[pos] = 0;
}

}  // namespace

const char* to_string(MomentMethod m) {
  switch (m) {
    case MomentMethod::BallClosedForm: return "ball";
    case MomentMethod::BoxClosedForm: return "box";
    case MomentMethod::MonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

std::vector<Monomial> monomial_basis(int n, int d) {
  if (n < 1) throw std::invalid_argument("monomial_basis: dimension must be positive");
  if (d < 0) throw std::invalid_argument("monomial_basis: negative degree");
  std::vector<Monomial> out;
  std::vector<int> current(n, 0);
  for (int t = 0; t <= d; ++t) exponents_of_degree(n, t, 0, current, out);
  return out;
}

double ball_moment(int n, double radius, std::span<const int> alpha) {
  if (!(radius > 0.0)) throw std::invalid_argument("ball_moment: radius must be positive");
  if (static_cast<int>(alpha.size()) != n) throw std::invalid_argument("ball_moment: dimension mismatch");
  int total = 0;
  double log_num = 0.0;
  double half_sum = 0.0;
  for (int a : alpha) {
    if (a % 2 != 0) return 0.0;
    total += a;
    log_num += std::lgamma(0.5 * (a + 1));
    half_sum += 0.5 * (a + 1);
  }
  // 2 prod_j Gamma((a_j+1)/2) / ((n+|a|) Gamma(sum_j (a_j+1)/2)) R^(n+|a|)
  const double shape = 2.0 * std::exp(log_num - std::lgamma(half_sum)) / (n + total);
  return shape * std::pow(radius, n + total);
}

double box_moment(std::span<const Interval> bounds, std::span<const int> alpha) {
  if (bounds.size() != alpha.size()) throw std::invalid_argument("box_moment: dimension mismatch");
  double result = 1.0;
  for (std::size_t j = 0; j < bounds.size(); ++j) {
    const auto [lo, hi] = bounds[j];
    if (!(lo < hi)) throw std::invalid_argument("box_moment: degenerate interval");
    const int p = alpha[j] + 1;
    result *= (std::pow(hi, p) - std::pow(lo, p)) / p;
  }
  return result;
}

std::optional<double> exact_ball(const SemialgebraicSet& X) {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& g : X.constraints()) {
    auto rg = ball_radius_of(g);
    if (!rg) return std::nullopt;
    r = std::min(r, *rg);
  }
  return r;
}

std::optional<std::vector<Interval>> exact_box(const SemialgebraicSet& X) {
  const int n = X.dimension();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<Interval> box(n, Interval{-inf, inf});
  std::vector<double> ball_radii;
  for (const auto& g : X.constraints()) {
    int var = -1;
    bool univariate = true;
    for (const auto& [m, c] : g.terms()) {
      for (int j = 0; j < n; ++j) {
        if (m[j] == 0) continue;
        if (var >= 0 && var != j) univariate = false;
        var = j;
      }
    }
    if (!univariate) {
      if (auto r = ball_radius_of(g)) {
        ball_radii.push_back(*r);
        continue;
      }
      return std::nullopt;
    }
    if (var < 0) {
      if (g.coefficient(Monomial::one(n)) > 0.0) continue;
      return std::nullopt;
    }
    std::vector<int> e(n, 0);
    const double c0 = g.coefficient(Monomial(e));
    e[var] = 1;
    const double c1 = g.coefficient(Monomial(e));
    e[var] = 2;
    const double c2 = g.coefficient(Monomial(e));
    if (g.total_degree() > 2) return std::nullopt;
    Interval iv{-inf, inf};
    if (c2 == 0.0) {
      if (c1 > 0.0) iv.lo = -c0 / c1;
      else iv.hi = -c0 / c1;
    } else {
      if (c2 > 0.0) return std::nullopt;
      const double disc = c1 * c1 - 4.0 * c2 * c0;
      if (!(disc > 0.0)) return std::nullopt;
      const double s = std::sqrt(disc);
      const double r1 = (-c1 + s) / (2.0 * c2);
      const double r2 = (-c1 - s) / (2.0 * c2);
      iv.lo = std::min(r1, r2);
      iv.hi = std::max(r1, r2);
    }
    box[var].lo = std::max(box[var].lo, iv.lo);
    box[var].hi = std::min(box[var].hi, iv.hi);
  }
  double corner2 = 0.0;
  for (const auto& iv : box) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo < iv.hi)) return std::nullopt;
    corner2 += std::max(iv.lo * iv.lo, iv.hi * iv.hi);
  }
  for (double r : ball_radii) {
    if (corner2 > r * r) return std::nullopt;
  }
  return box;
}

MomentVector monte_carlo_moment_vector(const SemialgebraicSet& X, int d, const MonteCarloOptions& mc) {
  if (!X.ball_index()) throw std::invalid_argument("moment_vector: Monte Carlo path requires a ball constraint");
  if (mc.samples == 0) throw std::invalid_argument("moment_vector: zero Monte Carlo samples");
  const int n = X.dimension();
  const double R = X.ball_radius();
  MomentVector mv;
  mv.basis = monomial_basis(n, d);
  mv.method = MomentMethod::MonteCarlo;
  mv.samples = mc.samples;
  const std::size_t nb = mv.basis.size();

  std::vector<CompiledPolynomial> monomials;
  monomials.reserve(nb);
  for (const auto& m : mv.basis) monomials.emplace_back(Polynomial::monomial(m));

  const auto schedule = WorkerSchedule::split(mc.samples, mc.seed, mc.workers);
  const std::size_t workers = schedule.counts.size();
  std::vector<std::vector<double>> sums(workers, std::vector<double>(nb, 0.0));
  std::vector<std::vector<double>> sums2(workers, std::vector<double>(nb, 0.0));
  std::vector<std::size_t> accepted(workers, 0);

  for_each_worker(workers, [&](std::size_t w) {
    BallSampler sampler(n, R, schedule.seed_for(w));
    Point x(n);
    for (std::size_t s = 0; s < schedule.counts[w]; ++s) {
      sampler.draw(x);
      if (X.contains(x) == Membership::Outside) continue;
      ++accepted[w];
      for (std::size_t b = 0; b < nb; ++b) {
        const double v = monomials[b](x);
        sums[w][b] += v;
        sums2[w][b] += v * v;
      }
    }
  });

  std::vector<double> total(nb, 0.0), total2(nb, 0.0);
  for (std::size_t w = 0; w < workers; ++w) {
    mv.accepted += accepted[w];
    for (std::size_t b = 0; b < nb; ++b) {
      total[b] += sums[w][b];
      total2[b] += sums2[w][b];
    }
  }
  if (mv.accepted == 0) {
    throw std::runtime_error("moment_vector: no Monte Carlo sample fell in X (empty interior?)");
  }
  const double vol = ball_volume(n, R);
  const double N = static_cast<double>(mc.samples);
  mv.values.resize(nb);
  mv.std_errors.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const double mean = total[b] / N;
    const double var = std::max(0.0, total2[b] / N - mean * mean);
    mv.values[b] = vol * mean;
    mv.std_errors[b] = vol * std::sqrt(var / N);
  }
  return mv;
}

MomentVector moment_vector(const SemialgebraicSet& X, int d, const MonteCarloOptions& mc) {
  const int n = X.dimension();
  if (auto r = exact_ball(X)) {
    MomentVector mv;
    mv.basis = monomial_basis(n, d);
    mv.method = MomentMethod::BallClosedForm;
    for (const auto& m : mv.basis) mv.values.push_back(ball_moment(n, *r, m.exponents()));
    mv.std_errors.assign(mv.values.size(), 0.0);
    return mv;
  }
  if (auto box = exact_box(X)) {
    MomentVector mv;
    mv.basis = monomial_basis(n, d);
    mv.method = MomentMethod::BoxClosedForm;
    for (const auto& m : mv.basis) mv.values.push_back(box_moment(*box, m.exponents()));
    mv.std_errors.assign(mv.values.size(), 0.0);
    return mv;
  }
  return monte_carlo_moment_vector(X, d, mc);
}

}  // namespace innermpi

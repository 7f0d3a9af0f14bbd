#pragma once

// Adaptive Gauss-Legendre quadrature used as an independent oracle for the
// closed-form moments.

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace oracle {

struct GaussRule {
  std::vector<double> nodes, weights;
};

// Nodes and weights on [-1, 1] by Newton iteration on P_n.
inline GaussRule gauss_legendre(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.nodes[i] = z;
    r.weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

inline double fixed(const std::function<double(double)>& f, double a, double b, const GaussRule& rule) {
  const double m = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(m + h * rule.nodes[i]);
  return h * s;
}

// Recursive bisection until the whole-interval and split estimates agree.
inline double adaptive(const std::function<double(double)>& f, double a, double b, double tol, int depth = 0) {
  static const GaussRule rule = gauss_legendre(20);
  const double whole = fixed(f, a, b, rule);
  const double m = 0.5 * (a + b);
  const double split = fixed(f, a, m, rule) + fixed(f, m, b, rule);
  if (std::abs(whole - split) <= tol * std::max(1.0, std::abs(split)) || depth > 30) return split;
  return adaptive(f, a, m, tol, depth + 1) + adaptive(f, m, b, tol, depth + 1);
}

// Integral of x^alpha over the ball of radius R. Each coordinate is
// parametrized as x_j = r_j sin(theta_j) with r_{j+1} = r_j cos(theta_j),
// which keeps every integrand smooth; the last coordinate is integrated
// over [-r, r] directly.
inline double ball_moment(int n, double R, std::span<const int> alpha, double tol = 1e-14) {
  std::function<double(int, double)> level = [&](int j, double r) -> double {
    if (j == n - 1) {
      return adaptive([&](double t) { return std::pow(t, alpha[j]); }, -r, r, tol);
    }
    return adaptive(
        [&](double th) {
          const double c = std::cos(th);
          return std::pow(r * std::sin(th), alpha[j]) * r * c * level(j + 1, r * c);
        },
        -M_PI / 2, M_PI / 2, tol);
  };
  return level(0, R);
}

inline double box_moment(const std::vector<std::pair<double, double>>& bounds, std::span<const int> alpha,
                         double tol = 1e-14) {
  double p = 1.0;
  for (std::size_t j = 0; j < bounds.size(); ++j) {
    p *= adaptive([&](double t) { return std::pow(t, alpha[j]); }, bounds[j].first, bounds[j].second, tol);
  }
  return p;
}

}  // namespace oracle

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"

#include "innermpi/polynomial.hpp"

using namespace innermpi;

namespace {

Polynomial x(int n, int i) { return Polynomial::variable(n, i); }
Polynomial c(int n, double v) { return Polynomial::constant(n, v); }

Polynomial random_poly(std::mt19937_64& rng, int n, int degree, int terms) {
  std::uniform_int_distribution<int> e(0, degree);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  Polynomial p(n);
  for (int t = 0; t < terms; ++t) {
    std::vector<int> exps(n);
    int left = degree;
    for (auto& a : exps) {
      a = std::min(e(rng), left);
      left -= a;
    }
    p += Polynomial::monomial(Monomial(exps), coef(rng));
  }
  return p;
}

// Coefficient-wise distance, independent of the canonical form.
double distance(const Polynomial& a, const Polynomial& b) {
  double d = 0.0;
  for (const auto& [m, v] : a.terms()) d = std::max(d, std::abs(v - b.coefficient(m)));
  for (const auto& [m, v] : b.terms()) d = std::max(d, std::abs(v - a.coefficient(m)));
  return d;
}

const double kAlpha2 = 1.02 * 1.02;

std::vector<Polynomial> vdp() {
  return {-2.0 * x(2, 1), 0.8 * x(2, 0) + 10.0 * (kAlpha2 * x(2, 0) * x(2, 0) - c(2, 0.2)) * x(2, 1)};
}

}  // namespace

TEST_CASE("add") {
  CHECK((x(2, 0) + 2.0 * x(2, 1)) + 3.0 * x(2, 0) == 4.0 * x(2, 0) + 2.0 * x(2, 1));
  const Polynomial p = x(2, 0) * x(2, 1) + c(2, 3.0);
  CHECK(p + Polynomial(2) == p);
  const Polynomial z = x(2, 0) * x(2, 0) + (-1.0) * x(2, 0) * x(2, 0);
  CHECK(z.is_zero());
  CHECK(z.terms().empty());
  CHECK_THROWS(add(x(2, 0), x(3, 0)));
}

TEST_CASE("mul") {
  CHECK(x(2, 0) * x(2, 0) == Polynomial::monomial(Monomial({2, 0})));
  const Polynomial g = c(2, 1.0) - x(2, 0) * x(2, 0) - x(2, 1) * x(2, 1);
  CHECK(g * c(2, 1.0) == g);
  CHECK((x(2, 0) + x(2, 1)) * (x(2, 0) - x(2, 1)) == x(2, 0) * x(2, 0) - x(2, 1) * x(2, 1));
  CHECK((g * g).total_degree() == 4);
  CHECK_THROWS(mul(x(2, 0), x(1, 0)));
}

TEST_CASE("partial") {
  const Polynomial p = Polynomial::monomial(Monomial({2, 1}));
  CHECK(partial(p, 0) == 2.0 * x(2, 0) * x(2, 1));
  CHECK(partial(c(2, 5.0), 0).is_zero());
  const Polynomial q = x(2, 0) * x(2, 0) + 3.0 * Polynomial::monomial(Monomial({0, 3}));
  CHECK(partial(q, 1) == 9.0 * x(2, 1) * x(2, 1));
  CHECK_THROWS(partial(q, 2));
  CHECK_THROWS(partial(q, -1));
}

TEST_CASE("lie derivative") {
  const Polynomial v = x(2, 0) * x(2, 0) + x(2, 1) * x(2, 1);
  const std::vector<Polynomial> contraction{-x(2, 0), -x(2, 1)};
  CHECK(lie_derivative(v, contraction) == -2.0 * x(2, 0) * x(2, 0) - 2.0 * x(2, 1) * x(2, 1));

  // Hand expansion: 2 x1 (-2 x2) + 2 x2 (0.8 x1 + 10 a^2 x1^2 x2 - 2 x2).
  const Polynomial expected = -2.4 * x(2, 0) * x(2, 1) - 4.0 * x(2, 1) * x(2, 1) +
                              20.808 * Polynomial::monomial(Monomial({2, 2}));
  CHECK(distance(lie_derivative(v, vdp()), expected) < 1e-12);
  CHECK(lie_derivative(c(2, 4.0), vdp()).is_zero());
  CHECK_THROWS(lie_derivative(v, std::vector<Polynomial>{x(2, 0)}));
}

TEST_CASE("lie derivative matches a finite difference") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pt(-1.0, 1.0);
  const auto f = vdp();
  for (int trial = 0; trial < 20; ++trial) {
    const Polynomial v = random_poly(rng, 2, 4, 6);
    const std::vector<double> p{pt(rng), pt(rng)};
    const double h = 1e-6;
    std::vector<double> q{p[0] + h * f[0].eval(p), p[1] + h * f[1].eval(p)};
    const double fd = (v.eval(q) - v.eval(p)) / h;
    CHECK(std::abs(lie_derivative(v, f).eval(p) - fd) < 1e-4 * (1.0 + std::abs(fd)));
  }
}

TEST_CASE("eval") {
  const Polynomial r2 = x(2, 0) * x(2, 0) + x(2, 1) * x(2, 1);
  CHECK(r2.eval(std::vector<double>{0.6, 0.8}) == doctest::Approx(1.0).epsilon(1e-15));
  const Polynomial p = 3.5 * x(2, 0) * x(2, 1) + c(2, -1.25);
  CHECK(p.eval(std::vector<double>{0.0, 0.0}) == -1.25);
  CHECK(vdp()[1].eval(std::vector<double>{1.0, 1.0}) == doctest::Approx(9.204).epsilon(1e-14));
  CHECK_THROWS(p.eval(std::vector<double>{1.0}));
  const CompiledPolynomial cp(vdp()[1]);
  CHECK(cp(std::vector<double>{1.0, 1.0}) == doctest::Approx(9.204).epsilon(1e-14));
}

TEST_CASE("ring axioms on random polynomials") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pt(-1.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    const Polynomial a = random_poly(rng, 3, 3, 5);
    const Polynomial b = random_poly(rng, 3, 3, 5);
    const Polynomial d = random_poly(rng, 3, 2, 4);
    CHECK(distance(a + b, b + a) < 1e-12);
    CHECK(distance(a * b, b * a) < 1e-12);
    CHECK(distance((a + b) + d, a + (b + d)) < 1e-12);
    CHECK(distance((a * b) * d, a * (b * d)) < 1e-12);
    CHECK(distance(a * (b + d), a * b + a * d) < 1e-12);
    const std::vector<double> p{pt(rng), pt(rng), pt(rng)};
    const double lhs = (a * b).eval(p), rhs = a.eval(p) * b.eval(p);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("graded lexicographic order") {
  std::vector<Monomial> ms{Monomial({0, 2}), Monomial({1, 0}), Monomial({0, 0}), Monomial({1, 1}),
                           Monomial({2, 0}), Monomial({0, 1})};
  std::sort(ms.begin(), ms.end());
  const std::vector<Monomial> expected{Monomial({0, 0}), Monomial({1, 0}), Monomial({0, 1}),
                                       Monomial({2, 0}), Monomial({1, 1}), Monomial({0, 2})};
  CHECK(ms == expected);
  auto again = ms;
  std::sort(again.begin(), again.end());
  CHECK(again == ms);
  CHECK(Monomial({1, 2}).degree() == 3);
  CHECK(Monomial({1, 2}) == Monomial({1, 2}));
  CHECK_THROWS(Monomial({-1, 0}));
}

TEST_CASE("canonical form and degree") {
  CHECK(Polynomial(2).total_degree() == 0);
  CHECK((x(2, 0) * x(2, 1) * x(2, 1)).total_degree() == 3);
  const Polynomial tiny = 1e-16 * x(2, 0) + x(2, 1);
  CHECK(tiny.size() == 1);
  CHECK(tiny.to_string() == "x2");
}

#include <cmath>

#include "doctest.h"
#include "quadrature.hpp"

#include "innermpi/dynamics.hpp"

using namespace innermpi;

namespace {

Polynomial x(int n, int i) { return Polynomial::variable(n, i); }
Polynomial c2(double v) { return Polynomial::constant(2, v); }

SemialgebraicSet disk(double R) {
  return SemialgebraicSet({c2(R * R) - x(2, 0) * x(2, 0) - x(2, 1) * x(2, 1)});
}
OdeSystem expansion() { return OdeSystem({x(2, 0), x(2, 1)}); }
OdeSystem contraction() { return OdeSystem({-x(2, 0), -x(2, 1)}); }

// Terminal error of RK4 against x0 e^t.
double flow_error(double step) {
  const std::vector<double> x0{0.5, 0.0};
  const auto r = integrate(expansion(), disk(10.0), x0, 1.0, step);
  REQUIRE_FALSE(r.exited());
  return std::hypot(r.point[0] - 0.5 * std::exp(1.0), r.point[1]);
}

}  // namespace

TEST_CASE("exit time of the expansion from (0.5, 0) is ln 2") {
  const std::vector<double> x0{0.5, 0.0};
  const auto X = disk(1.0);
  for (double step : {1e-3, 5e-4}) {
    const auto r = integrate(expansion(), X, x0, 2.0, step);
    REQUIRE(r.exited());
    CHECK(std::abs(r.time - std::log(2.0)) <= 1e-6);
    CHECK(std::abs(r.point[0] - 1.0) <= 1e-6);
    CHECK(std::abs(r.point[1]) <= 1e-12);
    CHECK(std::abs(X.min_constraint(r.point)) <= X.boundary_tolerance());
  }
}

TEST_CASE("contraction stays until the horizon") {
  const std::vector<double> x0{0.5, 0.0};
  const auto r = integrate(contraction(), disk(1.0), x0, 10.0);
  CHECK_FALSE(r.exited());
  CHECK(r.time == doctest::Approx(10.0));
  CHECK(std::abs(r.point[0] - 0.5 * std::exp(-10.0)) <= 1e-9);
  CHECK(r.max_violation == 0.0);
}

TEST_CASE("zero field keeps the state constant") {
  const OdeSystem zero({Polynomial(2), Polynomial(2)});
  const std::vector<double> x0{0.3, -0.4};
  const std::vector<double> times{0.5, 1.0};
  const auto r = integrate(zero, disk(1.0), x0, 3.0, kDefaultStep, times);
  CHECK_FALSE(r.exited());
  CHECK(r.point == x0);
  REQUIRE(r.samples.size() == 2);
  for (const auto& s : r.samples) CHECK(s == x0);
}

TEST_CASE("sampled states follow the analytic flow") {
  const std::vector<double> x0{0.2, 0.1};
  const std::vector<double> times{0.25, 0.5, 5.0};
  const auto r = integrate(expansion(), disk(1.0), x0, 10.0, kDefaultStep, times);
  REQUIRE(r.exited());
  // Exit at ln(1/|x0|) ~ 1.497, so the sample at t = 5 is dropped.
  REQUIRE(r.samples.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(r.sample_times[i] == doctest::Approx(times[i]));
    CHECK(std::abs(r.samples[i][0] - 0.2 * std::exp(times[i])) <= 1e-10);
    CHECK(std::abs(r.samples[i][1] - 0.1 * std::exp(times[i])) <= 1e-10);
  }
}

TEST_CASE("RK4 order: halving the step divides the error by about 16") {
  const double e1 = flow_error(0.1), e2 = flow_error(0.05);
  const double ratio = e1 / e2;
  INFO("errors " << e1 << " " << e2);
  CHECK(ratio >= 8.0);
  CHECK(ratio <= 32.0);
}

TEST_CASE("integrate preconditions") {
  const auto X = disk(1.0);
  CHECK_THROWS_AS(integrate(expansion(), X, std::vector<double>{1.0, 0.0}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(integrate(expansion(), X, std::vector<double>{2.0, 0.0}, 1.0), std::invalid_argument);
  CHECK_THROWS(integrate(expansion(), X, std::vector<double>{0.0, 0.0}, 0.0));
  CHECK_THROWS(integrate(expansion(), X, std::vector<double>{0.0, 0.0}, 1.0, 0.0));
}

TEST_CASE("finite-time blow-up inside an unbounded set is reported") {
  // x' = x^2 from x = 1 escapes at t = 1; X = {1 + x1^2 >= 0} is all of R^2.
  const SemialgebraicSet everywhere({c2(1.0) + x(2, 0) * x(2, 0)});
  const OdeSystem blowup({x(2, 0) * x(2, 0), Polynomial(2)});
  CHECK_THROWS_AS(integrate(blowup, everywhere, std::vector<double>{1.0, 0.0}, 5.0, 1e-2), std::runtime_error);
}

TEST_CASE("average exit time of the expansion is 1/2") {
  // (1/pi) * integral over the disk of ln(1/r) = integral_0^1 2 r ln(1/r) dr.
  const double oracle_tau = oracle::adaptive([](double r) { return r > 0 ? -2.0 * r * std::log(r) : 0.0; }, 0.0,
                                             1.0, 1e-13);
  CHECK(oracle_tau == doctest::Approx(0.5).epsilon(1e-9));
  const auto e = estimate_avg_exit_time(expansion(), disk(1.0), 4000, 50.0, 11);
  INFO("tau_bar " << e.tau_bar << " +- " << e.std_error);
  CHECK(std::abs(e.tau_bar - oracle_tau) <= 3.0 * e.std_error);
  CHECK(e.censored_fraction == 0.0);
  CHECK_FALSE(e.censoring_flagged());
  CHECK(e.samples == 4000);
  CHECK(auto_time_bound(e) == doctest::Approx(2.0 * e.tau_bar));
}

TEST_CASE("contraction: nothing exits") {
  const auto e = estimate_avg_exit_time(contraction(), disk(1.0), 200, 2.0, 3);
  CHECK(e.tau_bar == 0.0);
  CHECK(e.censored_fraction == 1.0);
  CHECK(e.censoring_flagged());
  CHECK_THROWS(auto_time_bound(e));
}

TEST_CASE("late exits block the automatic time bound") {
  // With a horizon of 1.5, trajectories from |x0| in (e^-1.5, e^-0.75) exit in the second half.
  const auto e = estimate_avg_exit_time(expansion(), disk(1.0), 500, 1.5, 4);
  CHECK(e.late_exit_fraction > 0.01);
  CHECK_THROWS(auto_time_bound(e));
}

TEST_CASE("doubling the samples shrinks the standard error by about 1/sqrt(2)") {
  const auto a = estimate_avg_exit_time(expansion(), disk(1.0), 2000, 50.0, 7);
  const auto b = estimate_avg_exit_time(expansion(), disk(1.0), 4000, 50.0, 7);
  const double ratio = b.std_error / a.std_error;
  CHECK(ratio >= 0.6);
  CHECK(ratio <= 0.8);
}

TEST_CASE("exit-time estimate is deterministic and needs samples") {
  const auto a = estimate_avg_exit_time(expansion(), disk(1.0), 300, 50.0, 9);
  const auto b = estimate_avg_exit_time(expansion(), disk(1.0), 300, 50.0, 9);
  CHECK(a.tau_bar == b.tau_bar);
  CHECK(a.std_error == b.std_error);
  CHECK(a.seed == 9);
  CHECK_THROWS(estimate_avg_exit_time(expansion(), disk(1.0), 0, 50.0, 9));
}

#include <cmath>
#include <random>

#include "doctest.h"

#include "innermpi/semialgebraic.hpp"

using namespace innermpi;

namespace {

Polynomial x(int n, int i) { return Polynomial::variable(n, i); }
Polynomial one(int n) { return Polynomial::constant(n, 1.0); }

SemialgebraicSet unit_disk() { return SemialgebraicSet({one(2) - x(2, 0) * x(2, 0) - x(2, 1) * x(2, 1)}); }
SemialgebraicSet unit_box() {
  return SemialgebraicSet({one(2) - x(2, 0) * x(2, 0), one(2) - x(2, 1) * x(2, 1)});
}

}  // namespace

TEST_CASE("degree bookkeeping") {
  const SemialgebraicSet X({one(2) - x(2, 0) * x(2, 0) - x(2, 1) * x(2, 1),
                            x(2, 0) * x(2, 0) * x(2, 0) + one(2), x(2, 1) + one(2)});
  CHECK(X.degrees() == std::vector<int>{2, 3, 1});
  CHECK(X.half_degrees() == std::vector<int>{1, 2, 1});
  CHECK(X.k_min() == 2);
  CHECK(X.ball_index() == std::optional<std::size_t>(0));
  CHECK(X.ball_radius() == doctest::Approx(1.0));
  CHECK_THROWS(SemialgebraicSet({}));
  CHECK_THROWS(SemialgebraicSet({Polynomial(2)}));
}

TEST_CASE("ball detection requires the exact form") {
  const SemialgebraicSet scaled({Polynomial::constant(2, 4.0) - x(2, 0) * x(2, 0) - x(2, 1) * x(2, 1)});
  CHECK(scaled.ball_index().has_value());
  CHECK(scaled.ball_radius() == doctest::Approx(2.0));
  const SemialgebraicSet ellipse({one(2) - 2.0 * x(2, 0) * x(2, 0) - x(2, 1) * x(2, 1)});
  CHECK_FALSE(ellipse.ball_index().has_value());
}

TEST_CASE("contains") {
  const auto X = unit_disk();
  CHECK(X.contains(std::vector<double>{0.0, 0.0}) == Membership::Interior);
  CHECK(X.contains(std::vector<double>{1.0, 0.0}) == Membership::Boundary);
  CHECK(X.contains(std::vector<double>{2.0, 0.0}) == Membership::Outside);
  CHECK(X.contains(std::vector<double>{1.0 + 1e-11, 0.0}) == Membership::Boundary);
  CHECK(X.contains(std::vector<double>{1.0 - 1e-6, 0.0}) == Membership::Interior);
  CHECK_THROWS(X.contains(std::vector<double>{0.0}));
}

TEST_CASE("contains is consistent with min_constraint") {
  const auto X = unit_box();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> p{u(rng), u(rng)};
    const double g = X.min_constraint(p);
    const auto m = X.contains(p);
    if (m == Membership::Interior) CHECK(g > X.boundary_tolerance());
    if (m == Membership::Boundary) CHECK(std::abs(g) <= X.boundary_tolerance());
    if (m == Membership::Outside) CHECK(g < -X.boundary_tolerance());
  }
}

TEST_CASE("ensure_ball_constraint") {
  const auto disk = unit_disk();
  CHECK(disk.ensure_ball_constraint(1.0).constraints() == disk.constraints());
  const auto box = unit_box();
  const auto boxed = box.ensure_ball_constraint(2.0);
  CHECK(boxed.constraints().size() == 3);
  CHECK(boxed.ball_index() == std::optional<std::size_t>(2));
  CHECK(boxed.k_min() == 1);
  CHECK(boxed.ensure_ball_constraint(2.0).constraints() == boxed.constraints());
  CHECK_THROWS(box.ensure_ball_constraint(0.0));
  CHECK_THROWS(box.ensure_ball_constraint(-1.0));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    const std::vector<double> p{u(rng), u(rng)};
    if (boxed.contains(p) == Membership::Interior) CHECK(std::hypot(p[0], p[1]) < 2.0);
  }
}

TEST_CASE("sample_boundary") {
  const auto disk = unit_disk();
  const auto pts = disk.sample_boundary(4, 17);
  REQUIRE(pts.size() == 4);
  for (const auto& p : pts) {
    CHECK(std::abs(std::hypot(p[0], p[1]) - 1.0) <= 1e-9);
    CHECK(disk.contains(p) == Membership::Boundary);
  }
  CHECK(disk.sample_boundary(4, 17) == pts);
  CHECK(disk.sample_boundary(4, 18) != pts);

  const auto box = unit_box().ensure_ball_constraint(2.0);
  for (const auto& p : box.sample_boundary(50, 2)) {
    CHECK(std::abs(std::max(std::abs(p[0]), std::abs(p[1])) - 1.0) <= 1e-9);
    CHECK(box.contains(p) == Membership::Boundary);
  }
  CHECK_THROWS(disk.sample_boundary(0, 1));
}

TEST_CASE("empty interior has no anchor") {
  const SemialgebraicSet empty({-one(2) - x(2, 0) * x(2, 0) - x(2, 1) * x(2, 1)});
  CHECK_THROWS(empty.sample_boundary(1, 1));
}

TEST_CASE("ball sampler draws uniformly") {
  BallSampler s(2, 1.0, 9);
  int inside_half = 0;
  const int N = 20000;
  for (int i = 0; i < N; ++i) {
    const auto p = s.draw();
    const double r = std::hypot(p[0], p[1]);
    CHECK(r <= 1.0);
    if (r < 0.5) ++inside_half;
  }
  // P(r < 1/2) = 1/4 for the uniform disk.
  CHECK(std::abs(inside_half / double(N) - 0.25) < 4.0 * std::sqrt(0.25 * 0.75 / N));
  CHECK(ball_volume(2, 1.0) == doctest::Approx(M_PI));
  CHECK(ball_volume(3, 2.0) == doctest::Approx(4.0 / 3.0 * M_PI * 8.0));
}

TEST_CASE("worker schedule is fixed by the seed") {
  const auto s = WorkerSchedule::split(10, 100, 4);
  CHECK(s.counts == std::vector<std::size_t>{3, 3, 2, 2});
  CHECK(s.seed_for(2) == 102);
}

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "innermpi/polynomial.hpp"

namespace innermpi {

using Point = std::vector<double>;

enum class Membership { Interior, Boundary, Outside };

const char* to_string(Membership m);

inline constexpr double kDefaultBoundaryTolerance = 1e-9;

/// X = { x : g_i(x) >= 0, i = 1..n_X } with the degree bookkeeping used by
/// the hierarchy (delta_i, k_i = ceil(delta_i / 2), k_min = max_i k_i).
class SemialgebraicSet {
 public:
  explicit SemialgebraicSet(std::vector<Polynomial> constraints,
                            double boundary_tolerance = kDefaultBoundaryTolerance);

  int dimension() const { return n_; }
  const std::vector<Polynomial>& constraints() const { return constraints_; }
  const std::vector<int>& degrees() const { return degrees_; }
  const std::vector<int>& half_degrees() const { return half_degrees_; }
  int k_min() const { return k_min_; }
  double boundary_tolerance() const { return boundary_tol_; }

  /// Index of a constraint of the form R^2 - |x|^2, if any.
  std::optional<std::size_t> ball_index() const { return ball_index_; }
  /// R of the constraint at ball_index(); 0 when there is none.
  double ball_radius() const { return ball_radius_; }

  Membership contains(std::span<const double> x) const;
  double min_constraint(std::span<const double> x) const;

  /// Appends R^2 - |x|^2 unless some R'^2 - |x|^2 is already present.
  SemialgebraicSet ensure_ball_constraint(double radius) const;

  /// Points on the boundary found by bisection along random rays from an
  /// interior anchor. Deterministic for a given seed.
  std::vector<Point> sample_boundary(int count, std::uint64_t seed) const;

  /// Some interior point, searching the origin first and then uniform draws
  /// in the ball (or in a cube of half-width 10 when there is no ball).
  Point find_interior_anchor(std::mt19937_64& rng, int max_tries = 100000) const;

 private:
  int n_ = 0;
  std::vector<Polynomial> constraints_;
  std::vector<CompiledPolynomial> compiled_;
  std::vector<int> degrees_;
  std::vector<int> half_degrees_;
  int k_min_ = 0;
  double boundary_tol_ = kDefaultBoundaryTolerance;
  std::optional<std::size_t> ball_index_;
  double ball_radius_ = 0.0;
};

/// R if g is coefficient-wise R^2 - sum_j x_j^2 with R > 0.
std::optional<double> ball_radius_of(const Polynomial& g);

/// Volume of the n-dimensional ball of radius R.
double ball_volume(int n, double radius);

/// Uniform draws from the ball of radius R centred at the origin.
class BallSampler {
 public:
  BallSampler(int n, double radius, std::uint64_t seed) : n_(n), radius_(radius), rng_(seed) {}
  void draw(std::span<double> out);
  Point draw() {
    Point p(n_);
    draw(p);
    return p;
  }
  std::mt19937_64& rng() { return rng_; }

 private:
  int n_;
  double radius_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Fixed split of a sample budget over workers: worker j draws counts[j]
/// samples with seed base_seed + j, independent of how many threads run.
struct WorkerSchedule {
  std::vector<std::size_t> counts;
  std::uint64_t base_seed = 0;

  static WorkerSchedule split(std::size_t total, std::uint64_t seed, int workers = 8);
  std::uint64_t seed_for(std::size_t worker) const { return base_seed + worker; }
};

/// Runs fn(worker_index) for every worker, in parallel when the hardware
/// allows it. fn must only touch per-worker state.
void for_each_worker(std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace innermpi

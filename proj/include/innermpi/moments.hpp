#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "innermpi/polynomial.hpp"
#include "innermpi/semialgebraic.hpp"

namespace innermpi {

/// All monomials in n variables of total degree <= d, graded-lex ordered.
std::vector<Monomial> monomial_basis(int n, int d);

/// Integral of x^alpha over the ball of radius R in R^n.
double ball_moment(int n, double radius, std::span<const int> alpha);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Integral of x^alpha over the box prod_j [lo_j, hi_j].
double box_moment(std::span<const Interval> bounds, std::span<const int> alpha);

enum class MomentMethod { BallClosedForm, BoxClosedForm, MonteCarlo };

const char* to_string(MomentMethod m);

/// Lebesgue moments of X over a monomial basis.
struct MomentVector {
  std::vector<Monomial> basis;
  std::vector<double> values;
  /// Zero for the closed forms.
  std::vector<double> std_errors;
  MomentMethod method = MomentMethod::BallClosedForm;
  std::size_t samples = 0;
  std::size_t accepted = 0;

  /// lambda(X).
  double mass() const { return values.front(); }
};

struct MonteCarloOptions {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 0;
  int workers = 8;
};

/// Radius when X is exactly a single ball (every constraint is a ball
/// constraint; the smallest one wins).
std::optional<double> exact_ball(const SemialgebraicSet& X);

/// Per-coordinate bounds when X is exactly a box: every constraint is
/// univariate of degree <= 2 (an interval in that coordinate), every
/// coordinate is bounded, and any ball constraint contains the box.
std::optional<std::vector<Interval>> exact_box(const SemialgebraicSet& X);

/// Moments up to degree d. Closed forms for balls and boxes, Monte Carlo
/// over the ball constraint otherwise.
MomentVector moment_vector(const SemialgebraicSet& X, int d, const MonteCarloOptions& mc = {});

/// Monte Carlo estimate regardless of geometry (used to cross-check the
/// closed forms).
MomentVector monte_carlo_moment_vector(const SemialgebraicSet& X, int d, const MonteCarloOptions& mc);

}  // namespace innermpi

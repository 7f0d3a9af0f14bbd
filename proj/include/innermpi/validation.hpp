#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "innermpi/dynamics.hpp"
#include "innermpi/hierarchy.hpp"

namespace innermpi {

struct ValidationConfig {
  std::size_t interior_samples = 10000;
  std::size_t boundary_samples = 1000;
  /// Member points (v < -margin) to integrate.
  std::size_t invariance_samples = 2000;
  std::size_t volume_samples = 100000;
  std::size_t finite_horizon_samples = 500;
  /// Invariance horizon; nullopt means max(20, 5 T).
  std::optional<double> simulation_horizon;
  /// Horizons t for the finite-horizon check; empty means {T}.
  std::vector<double> finite_horizons;
  /// Allowed increase of v along a trajectory beyond u t.
  double descent_tolerance = 1e-4;
  double step = kDefaultStep;
  std::uint64_t seed = 1;
  int workers = 8;

  double horizon_for(double T) const { return simulation_horizon.value_or(std::max(20.0, 5.0 * T)); }
  bool operator==(const ValidationConfig&) const = default;
};

/// Minimum over the samples; should be >= -1e-6 s.
struct ResidualSummary {
  std::string name;
  std::size_t samples = 0;
  double min_value = 0.0;
  double tolerance = 0.0;
  bool passed() const { return min_value >= tolerance; }
};

struct InvarianceSummary {
  std::size_t tested = 0;
  std::size_t exit_failures = 0;
  std::size_t descent_failures = 0;
  /// max over samples and times of v(x(t)) - v(x0) - u t.
  double max_descent_violation = 0.0;
  /// max |x0| over the tested members.
  double max_member_norm = 0.0;
  double horizon = 0.0;
  std::size_t failures() const { return exit_failures + descent_failures; }
};

struct FiniteHorizonSummary {
  double t = 0.0;
  std::size_t tested = 0;
  std::size_t failures = 0;
};

struct VolumeEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

struct ValidationReport {
  int k = 0;
  CertificateMode mode = CertificateMode::SlackU;
  std::uint64_t seed = 0;
  double scale = 1.0;
  double margin = 0.0;
  /// Degenerate certificates, or no sampled point with v < 0: every check passes vacuously.
  bool vacuous = false;
  std::vector<ResidualSummary> residuals;
  InvarianceSummary invariance;
  std::vector<FiniteHorizonSummary> finite_horizon;
  /// Volume of the claimed inner set (0 when vacuous).
  VolumeEstimate volume;
  /// Volume of {x in int(X) : v(x) < 0} regardless of degeneracy.
  VolumeEstimate raw_volume;
  std::optional<ExitTimeEstimate> exit_time;

  bool residuals_passed() const;
  bool invariance_passed() const { return invariance.failures() == 0; }
  bool finite_horizon_passed() const;
};

/// s = 1 + max |coefficient| over v, w and u.
double certificate_scale(const Certificate& cert);
/// 1e-3 (1 + max |coefficient of v|).
double validation_margin(const Certificate& cert);

/// Residual sampling, invariance simulation, Monte Carlo volume and, in
/// slack mode with u > 0, the finite-horizon check. Failures are recorded,
/// never thrown.
ValidationReport validate_certificate(const Certificate& cert, const OdeSystem& system, const SemialgebraicSet& X,
                                      const ValidationConfig& config = {});

/// Monte Carlo volume of {x in int(X) : v(x) < 0}.
VolumeEstimate inner_set_volume(const Polynomial& v, const SemialgebraicSet& X, std::size_t samples,
                                std::uint64_t seed, int workers = 8);

/// Monte Carlo volume of the symmetric difference of {v_a < 0} and {v_b < 0} within int(X).
VolumeEstimate symmetric_difference_volume(const Polynomial& va, const Polynomial& vb, const SemialgebraicSet& X,
                                           std::size_t samples, std::uint64_t seed, int workers = 8);

nlohmann::json validation_to_json(const ValidationReport& report);

}  // namespace innermpi

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "innermpi/moments.hpp"
#include "innermpi/polynomial.hpp"
#include "innermpi/sdp_solver.hpp"
#include "innermpi/semialgebraic.hpp"
#include "innermpi/sos_program.hpp"

namespace innermpi {

/// dx/dt = f(x) with polynomial right-hand side.
class OdeSystem {
 public:
  explicit OdeSystem(std::vector<Polynomial> f);

  int dimension() const { return static_cast<int>(f_.size()); }
  /// delta_0, the largest component degree.
  int degree() const { return degree_; }
  const std::vector<Polynomial>& field() const { return f_; }
  void eval(std::span<const double> x, std::span<double> out) const;

 private:
  std::vector<Polynomial> f_;
  std::vector<CompiledPolynomial> compiled_;
  int degree_ = 0;
};

enum class CertificateMode { SlackU, ForcedUZero };

const char* to_string(CertificateMode m);
CertificateMode parse_certificate_mode(const std::string& s);

/// u at or below this supports an infinite-horizon claim from slack mode.
inline constexpr double kUNearZero = 1e-5;
/// u changes below this are solver noise, not a trend.
inline constexpr double kUIncreaseTolerance = 1e-8;
/// v with max |coefficient| below this carries no usable level set.
inline constexpr double kDegenerateCoefficient = 1e-4;
/// Coefficients above this trigger a conditioning warning.
inline constexpr double kConditioningWarning = 1e4;

struct Tightening {
  int k = 0;
  CertificateMode mode = CertificateMode::SlackU;
  double T = 0.0;
  SosProgram program{1};
  PolyVar v;
  PolyVar w;
  std::optional<ScalarVar> u;
  std::vector<SosVar> multipliers;
  /// t_i+ - t_i- of the v identity, one free polynomial per constraint.
  std::vector<PolyVar> signed_multipliers;
  MomentVector moments;
};

/// Degree cap of a free SOS term balancing an identity side of degree D.
inline int free_sos_cap(int D) { return 2 * ((std::max(D, 0) + 1) / 2); }

/// Assembles the four identities
///   u - grad(v).f = q0 + sum q_i g_i,   w - v - 1 = p0 + sum p_i g_i,
///   w = s0 + sum s_i g_i,               v = t0 + sum (t_i+ - t_i-) g_i,
/// minimizing w'l + u T l_0 (slack mode) or w'l (u = 0).
Tightening build_tightening(const OdeSystem& system, const SemialgebraicSet& X, int k, double T,
                            CertificateMode mode, const MonteCarloOptions& mc = {});

struct SolverStats {
  SolveStatus status = SolveStatus::NumericalTrouble;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
  double min_gram_eigenvalue = 0.0;
  double seconds = 0.0;
  std::string message;
};

struct Certificate {
  int k = 0;
  CertificateMode mode = CertificateMode::SlackU;
  double T = 0.0;
  double u = 0.0;
  Polynomial v;
  Polynomial w;
  /// Optimal value of the SOS side.
  double objective = 0.0;
  /// Optimal value of the moment side, read from the solver duals.
  double moment_value = 0.0;
  SolverStats stats;
  bool degenerate = false;
  bool ill_conditioned = false;

  bool optimal() const { return stats.status == SolveStatus::Optimal; }
  /// Optimal and not degenerate.
  bool usable() const { return optimal() && !degenerate; }
  /// {v < 0} is claimed invariant: forced mode, or slack mode with u near zero.
  bool infinite_horizon() const {
    return usable() && (mode == CertificateMode::ForcedUZero || u <= kUNearZero);
  }
};

Certificate solve_tightening(const Tightening& t, const SolverOptions& options = {});
/// Reads v, w and u back from a solution of t.program.compile(); stats.seconds is left at 0.
Certificate certificate_from_solution(const Tightening& t, const SdpProblem& problem, const SdpSolution& sol);

/// x in int(X) and v(x) < 0; with t, x in int(X) and v(x) + u t < 0.
bool inner_set_membership(const Certificate& cert, const SemialgebraicSet& X, std::span<const double> x,
                          std::optional<double> t = std::nullopt);

nlohmann::json certificate_to_json(const Certificate& cert);
Certificate certificate_from_json(const nlohmann::json& j);

struct HierarchyRun {
  CertificateMode mode = CertificateMode::SlackU;
  double T = 0.0;
  std::vector<Certificate> certificates;
  /// Orders k where objective(k) exceeds objective(previous) + 1e-6 (1 + |objective(previous)|).
  std::vector<int> monotonicity_violations;
  /// Orders k where u(k) exceeds u(previous) + kUIncreaseTolerance in slack mode.
  std::vector<int> u_increases;
};

/// Solves the orders in sequence; on_certificate sees each result as soon as it exists.
HierarchyRun run_hierarchy(const OdeSystem& system, const SemialgebraicSet& X, std::span<const int> orders, double T,
                           CertificateMode mode, const SolverOptions& options = {}, const MonteCarloOptions& mc = {},
                           const std::function<void(const Certificate&)>& on_certificate = {});

}  // namespace innermpi

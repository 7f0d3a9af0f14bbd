#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "innermpi/sdp_problem.hpp"

namespace innermpi {

enum class SolveStatus { Optimal, PrimalInfeasible, DualInfeasible, MaxIter, NumericalTrouble };

const char* to_string(SolveStatus s);

struct SolverOptions {
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  int max_iter = 200;
  bool verbose = false;

  bool operator==(const SolverOptions&) const = default;
};

struct SdpSolution {
  SolveStatus status = SolveStatus::NumericalTrouble;
  /// Primal values in SdpProblem variable order.
  std::vector<double> x;
  /// Multipliers of the equality rows.
  std::vector<double> y;
  /// Dual slack of each PSD block, C_b - A_b^*(y).
  std::vector<Eigen::MatrixXd> dual_slack;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  /// ||Ax - b|| / (1 + ||b||) on the original rows.
  double primal_residual = 0.0;
  /// Relative dual residual of the free-variable and slack equations.
  double dual_residual = 0.0;
  /// |primal - dual| / (1 + |primal|).
  double relative_gap = 0.0;
  int iterations = 0;
  std::string message;

  /// Reconstructed symmetric Gram block b of x.
  Eigen::MatrixXd gram_block(const SdpProblem& problem, int b) const;
};

/// Pluggable conic backend.
class SdpBackend {
 public:
  virtual ~SdpBackend() = default;
  virtual std::string name() const = 0;
  virtual SdpSolution solve(const SdpProblem& problem, const SolverOptions& options) const = 0;
};

/// Infeasible-start primal-dual path-following method (HKM direction with
/// Mehrotra predictor-corrector). Free variables are eliminated up front by
/// an orthogonal row transformation and recovered afterwards.
class InteriorPointBackend final : public SdpBackend {
 public:
  std::string name() const override { return "interior-point"; }
  SdpSolution solve(const SdpProblem& problem, const SolverOptions& options) const override;
};

/// Solves with the default backend. Throws std::invalid_argument for a
/// structurally empty problem.
SdpSolution solve(const SdpProblem& problem, const SolverOptions& options = {});

/// Backend-independent re-check of a returned solution.
struct SolutionCheck {
  double max_row_residual = 0.0;
  double relative_row_residual = 0.0;
  std::vector<double> min_block_eigenvalues;
  double min_eigenvalue = 0.0;
  double min_nonneg = 0.0;
  double primal_objective = 0.0;
};

SolutionCheck check_solution(const SdpProblem& problem, const SdpSolution& solution);

}  // namespace innermpi

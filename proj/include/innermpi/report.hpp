#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "json.hpp"

#include "innermpi/config.hpp"
#include "innermpi/dynamics.hpp"
#include "innermpi/hierarchy.hpp"
#include "innermpi/validation.hpp"

namespace innermpi {

struct GridRow {
  double x1 = 0.0;
  double x2 = 0.0;
  double v = 0.0;
  /// contains(X, x) == Interior.
  bool member = false;
};

/// Row-major grid over [-R, R]^2 in (x1, x2), x1 varying fastest. For
/// n > 2 the remaining coordinates are fixed at anchor (zeros if empty).
std::vector<GridRow> export_levelset_grid(const Certificate& cert, const SemialgebraicSet& X, int resolution,
                                          std::span<const double> anchor = {});
void write_levelset_csv(std::ostream& out, const std::vector<GridRow>& rows);

enum ExitStatus : int { kExitOk = 0, kExitFailedChecks = 1, kExitConfigError = 2, kExitRuntimeError = 3 };

struct RunResult {
  int exit_status = kExitOk;
  double T = 0.0;
  std::optional<ExitTimeEstimate> exit_time;
  std::optional<HierarchyRun> slack;
  std::optional<HierarchyRun> forced;
  std::vector<ValidationReport> validations;
};

/// Runs the configured hierarchy, validation and exports, writing
///   certificate_k{K}.json, validation_k{K}.json, levelset_k{K}.csv, summary.json
/// into config.output_directory. In "both" mode the forced re-solves carry
/// a "_forced" suffix. Files are written as soon as each order finishes.
RunResult run(const RunConfig& config, std::ostream& log);

nlohmann::json summary_json(const RunConfig& config, const RunResult& result);

}  // namespace innermpi

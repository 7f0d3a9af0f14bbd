#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "innermpi/hierarchy.hpp"
#include "innermpi/validation.hpp"

namespace innermpi {

enum class RunMode { Slack, Forced, Both };

const char* to_string(RunMode m);
RunMode parse_run_mode(const std::string& s);

/// Configuration error with a 1-based source position (0 when unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0, int column = 0);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct RunConfig {
  std::string name = "run";
  int dimension = 0;
  std::vector<Polynomial> dynamics;
  std::vector<Polynomial> constraints;
  /// Defaults to the set's k_min.
  std::optional<int> k_min;
  int k_max = 0;
  /// nullopt selects T = 2 tau_bar automatically.
  std::optional<double> time_bound;
  RunMode mode = RunMode::Slack;
  SolverOptions solver;
  /// Moment samples when no closed form applies.
  std::size_t moment_samples = 1'000'000;
  bool validate = true;
  ValidationConfig validation;
  std::size_t exit_time_samples = 2000;
  double exit_time_horizon = kDefaultExitHorizon;
  std::uint64_t seed = 1;
  std::string output_directory = "out";
  /// Points per axis of the level-set grid; 0 disables the export.
  int grid = 101;
  /// Fixed coordinates x3..xn of the exported slice.
  std::vector<double> grid_anchor;

  bool operator==(const RunConfig&) const = default;

  /// First order to solve after defaulting.
  int first_order() const;
};

/// Parses YAML text; errors carry the line and column of the offending node.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);
/// YAML that parse_run_config maps back to an equal RunConfig.
std::string to_yaml(const RunConfig& config);

/// Checks cross-field invariants: dimensions, ball constraint, k range.
void check_run_config(const RunConfig& config);

}  // namespace innermpi

// Command-line driver: reads a run configuration, applies flag overrides and runs the pipeline.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "innermpi/config.hpp"
#include "innermpi/report.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Inner approximations of maximal positively invariant sets by SOS hierarchies"};
  std::string config_path;
  std::optional<int> degree;
  std::optional<double> time_bound;
  std::optional<std::string> mode;
  std::optional<bool> validate;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> grid;
  bool print_config = false;

  app.add_option("--config", config_path, "YAML run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--degree", degree, "solve the single order K instead of the configured range");
  app.add_option("--time-bound", time_bound, "time bound T (overrides the configuration)");
  app.add_option("--mode", mode, "certificate mode")->check(CLI::IsMember({"slack", "forced", "both"}));
  app.add_flag("--validate,!--no-validate", validate, "run or skip simulation-based validation");
  app.add_option("--seed", seed, "seed for every random draw");
  app.add_option("--out", out, "output directory");
  app.add_option("--grid", grid, "level-set grid points per axis (0 disables)");
  app.add_flag("--print-config", print_config, "print the effective configuration and exit");
  CLI11_PARSE(app, argc, argv);

  innermpi::RunConfig config;
  try {
    config = innermpi::load_run_config(config_path);
    if (degree) {
      config.k_min = *degree;
      config.k_max = *degree;
    }
    if (time_bound) config.time_bound = *time_bound;
    if (mode) config.mode = innermpi::parse_run_mode(*mode);
    if (validate) config.validate = *validate;
    if (seed) {
      config.seed = *seed;
      config.validation.seed = *seed;
    }
    if (out) config.output_directory = *out;
    if (grid) config.grid = *grid;
    innermpi::check_run_config(config);
  } catch (const std::exception& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return innermpi::kExitConfigError;
  }
  if (print_config) {
    std::cout << innermpi::to_yaml(config);
    return innermpi::kExitOk;
  }

  try {
    const auto result = innermpi::run(config, std::cout);
    std::cout << "outputs in " << config.output_directory << " (exit status " << result.exit_status << ")\n";
    return result.exit_status;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return innermpi::kExitRuntimeError;
  }
}

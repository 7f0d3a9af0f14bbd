#include <filesystem>
#include <string>

#include "doctest.h"

#include "innermpi/config.hpp"

using namespace innermpi;

namespace {

const std::string kMinimal = R"(dimension: 2
dynamics: ["-x1", "-x2"]
constraints: ["1 - x1^2 - x2^2"]
hierarchy:
  k_max: 3
)";

ConfigError config_error(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("no configuration error");
  return ConfigError("");
}

std::filesystem::path bundled(const char* name) {
  return std::filesystem::path(INNERMPI_SOURCE_DIR) / "configs" / name;
}

}  // namespace

TEST_CASE("minimal configuration and defaults") {
  const auto c = parse_run_config(kMinimal);
  CHECK(c.dimension == 2);
  CHECK(c.dynamics.size() == 2);
  CHECK(c.k_max == 3);
  CHECK_FALSE(c.k_min.has_value());
  CHECK(c.first_order() == 1);
  CHECK_FALSE(c.time_bound.has_value());
  CHECK(c.mode == RunMode::Slack);
  CHECK(c.validate);
  CHECK(c.validation == ValidationConfig{});
}

TEST_CASE("mode names") {
  CHECK(parse_run_mode("slack-u") == RunMode::Slack);
  CHECK(parse_run_mode("forced-u-zero") == RunMode::Forced);
  CHECK(parse_run_mode("both") == RunMode::Both);
  for (auto m : {RunMode::Slack, RunMode::Forced, RunMode::Both}) CHECK(parse_run_mode(to_string(m)) == m);
  CHECK_THROWS(parse_run_mode("maybe"));
}

TEST_CASE("round trip through YAML") {
  auto c = parse_run_config(kMinimal);
  c.name = "custom";
  c.k_min = 2;
  c.time_bound = 31.830988618379067;
  c.mode = RunMode::Both;
  c.seed = 42;
  c.validation.seed = 42;
  c.solver.gap_tol = 1e-9;
  c.solver.max_iter = 77;
  c.validation.simulation_horizon = 20.0;
  c.validation.finite_horizons = {0.5, 1.25};
  c.validation.invariance_samples = 321;
  c.exit_time_samples = 999;
  c.output_directory = "out/x";
  c.grid = 11;
  const auto back = parse_run_config(to_yaml(c));
  CHECK(back == c);
  CHECK(parse_run_config(to_yaml(back)) == c);
}

TEST_CASE("bundled configurations load and round trip") {
  for (const char* name : {"vanderpol.yaml", "contraction.yaml", "expansion.yaml"}) {
    INFO(name);
    const auto c = load_run_config(bundled(name));
    CHECK(parse_run_config(to_yaml(c)) == c);
  }
  const auto vdp = load_run_config(bundled("vanderpol.yaml"));
  REQUIRE(vdp.time_bound.has_value());
  CHECK(*vdp.time_bound == doctest::Approx(100.0 / M_PI));
  CHECK(vdp.k_max == 6);
  CHECK(vdp.mode == RunMode::Both);
}

TEST_CASE("errors carry line and column") {
  const auto unknown = config_error(kMinimal + "colour: red\n");
  CHECK(unknown.line() == 6);
  CHECK(unknown.column() == 1);

  const auto bad_poly = config_error(R"(dimension: 2
dynamics:
  - "-x1"
  - "-x3"
constraints: ["1 - x1^2 - x2^2"]
hierarchy: {k_max: 2}
)");
  CHECK(bad_poly.line() == 4);
  CHECK(bad_poly.column() == 5);

  const auto bad_number = config_error(kMinimal + "seed: many\n");
  CHECK(bad_number.line() == 6);
  CHECK(bad_number.column() == 7);

  const auto syntax = config_error("dimension: [2\n");
  CHECK(syntax.line() >= 1);
  CHECK_THROWS_AS(load_run_config(bundled("missing.yaml")), ConfigError);
}

TEST_CASE("cross-field checks") {
  auto with = [](const std::string& replace_from, const std::string& replace_to) {
    std::string t = kMinimal;
    t.replace(t.find(replace_from), replace_from.size(), replace_to);
    return t;
  };
  // k_max below the set's k_min.
  CHECK_THROWS_AS(parse_run_config(with("k_max: 3", "k_max: 0")), ConfigError);
  CHECK_THROWS_AS(parse_run_config(with("k_max: 3", "k_min: 3\n  k_max: 2")), ConfigError);
  CHECK_THROWS_AS(parse_run_config(with("[\"-x1\", \"-x2\"]", "[\"-x1\"]")), ConfigError);
  CHECK_THROWS_AS(parse_run_config(with("1 - x1^2 - x2^2", "1 - x1^2")), ConfigError);
  CHECK_THROWS_AS(parse_run_config(kMinimal + "time_bound: -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config(kMinimal + "output: {grid: 1}\n"), ConfigError);
  CHECK_NOTHROW(parse_run_config(kMinimal + "time_bound: auto\n"));
  // A quartic constraint raises the set's k_min to 2.
  const std::string quartic_text = with("[\"1 - x1^2 - x2^2\"]", "[\"1 - x1^2 - x2^2\", \"1 - x1^4\"]");
  CHECK(parse_run_config(quartic_text).first_order() == 2);
  std::string low = quartic_text;
  low.replace(low.find("k_max: 3"), 8, "k_max: 1");
  CHECK_THROWS_AS(parse_run_config(low), ConfigError);
}

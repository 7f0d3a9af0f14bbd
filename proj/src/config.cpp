#include "innermpi/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "innermpi/poly_parse.hpp"

namespace innermpi {

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::Slack: return "slack";
    case RunMode::Forced: return "forced";
    case RunMode::Both: return "both";
  }
  return "?";
}

RunMode parse_run_mode(const std::string& s) {
  if (s == "slack" || s == "slack-u") return RunMode::Slack;
  if (s == "forced" || s == "forced-u-zero") return RunMode::Forced;
  if (s == "both") return RunMode::Both;
  throw std::invalid_argument("unknown mode '" + s + "' (expected slack, forced or both)");
}

namespace {

std::string position(int line, int column) {
  if (line <= 0) return "";
  return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": ";
}

}  // namespace

ConfigError::ConfigError(const std::string& message, int line, int column)
    : std::runtime_error(position(line, column) + message), line_(line), column_(column) {}

int RunConfig::first_order() const {
  if (k_min) return *k_min;
  return SemialgebraicSet(constraints).k_min();
}

namespace {

[[noreturn]] void fail_at(const YAML::Node& node, const std::string& what) {
  const YAML::Mark m = node.Mark();
  if (m.is_null()) throw ConfigError(what);
  throw ConfigError(what, m.line + 1, m.column + 1);
}

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& section) {
  if (!map.IsMap()) fail_at(map, section + " must be a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail_at(kv.first, "unknown key '" + key + "' in " + section);
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& what) {
  if (!node.IsScalar()) fail_at(node, what + " must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail_at(node, "cannot read " + what + " from '" + node.Scalar() + "'");
  }
}

template <class T>
void read(const YAML::Node& map, const char* key, T& out, const std::string& section) {
  if (const YAML::Node n = map[key]) out = scalar<T>(n, section + "." + key);
}

std::vector<Polynomial> polynomials(const YAML::Node& list, int n, const std::string& what) {
  if (!list.IsSequence()) fail_at(list, what + " must be a list of polynomial strings");
  std::vector<Polynomial> out;
  for (const auto& item : list) {
    const auto text = scalar<std::string>(item, what + " entry");
    try {
      out.push_back(parse_polynomial(text, n));
    } catch (const PolynomialParseError& e) {
      fail_at(item, what + ": " + e.what());
    }
  }
  return out;
}

std::optional<double> auto_or_number(const YAML::Node& node, const std::string& what) {
  const auto s = scalar<std::string>(node, what);
  if (s == "auto") return std::nullopt;
  return scalar<double>(node, what);
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (!root || !root.IsMap()) throw ConfigError("configuration must be a YAML mapping");
  check_keys(root,
             {"name", "dimension", "dynamics", "constraints", "hierarchy", "time_bound", "mode", "seed", "solver",
              "moments", "validation", "output"},
             "configuration");

  RunConfig c;
  read(root, "name", c.name, "configuration");
  if (!root["dimension"]) throw ConfigError("missing required key 'dimension'");
  c.dimension = scalar<int>(root["dimension"], "dimension");
  if (c.dimension < 1) fail_at(root["dimension"], "dimension must be positive");
  if (!root["dynamics"]) throw ConfigError("missing required key 'dynamics'");
  c.dynamics = polynomials(root["dynamics"], c.dimension, "dynamics");
  if (!root["constraints"]) throw ConfigError("missing required key 'constraints'");
  c.constraints = polynomials(root["constraints"], c.dimension, "constraints");

  if (const YAML::Node h = root["hierarchy"]) {
    check_keys(h, {"k_min", "k_max"}, "hierarchy");
    if (h["k_min"]) c.k_min = scalar<int>(h["k_min"], "hierarchy.k_min");
    if (!h["k_max"]) fail_at(h, "hierarchy.k_max is required");
    c.k_max = scalar<int>(h["k_max"], "hierarchy.k_max");
  } else {
    throw ConfigError("missing required section 'hierarchy'");
  }
  if (const YAML::Node t = root["time_bound"]) c.time_bound = auto_or_number(t, "time_bound");
  if (const YAML::Node m = root["mode"]) {
    try {
      c.mode = parse_run_mode(scalar<std::string>(m, "mode"));
    } catch (const std::invalid_argument& e) {
      fail_at(m, e.what());
    }
  }
  read(root, "seed", c.seed, "configuration");

  if (const YAML::Node s = root["solver"]) {
    check_keys(s, {"gap_tol", "feas_tol", "max_iter", "verbose"}, "solver");
    read(s, "gap_tol", c.solver.gap_tol, "solver");
    read(s, "feas_tol", c.solver.feas_tol, "solver");
    read(s, "max_iter", c.solver.max_iter, "solver");
    read(s, "verbose", c.solver.verbose, "solver");
  }
  if (const YAML::Node m = root["moments"]) {
    check_keys(m, {"samples"}, "moments");
    read(m, "samples", c.moment_samples, "moments");
  }
  if (const YAML::Node v = root["validation"]) {
    check_keys(v,
               {"enabled", "interior_samples", "boundary_samples", "invariance_samples", "volume_samples",
                "finite_horizon_samples", "simulation_horizon", "finite_horizons", "descent_tolerance", "step",
                "workers", "exit_time_samples", "exit_time_horizon"},
               "validation");
    auto& vc = c.validation;
    read(v, "enabled", c.validate, "validation");
    read(v, "interior_samples", vc.interior_samples, "validation");
    read(v, "boundary_samples", vc.boundary_samples, "validation");
    read(v, "invariance_samples", vc.invariance_samples, "validation");
    read(v, "volume_samples", vc.volume_samples, "validation");
    read(v, "finite_horizon_samples", vc.finite_horizon_samples, "validation");
    if (const YAML::Node h = v["simulation_horizon"]) {
      vc.simulation_horizon = auto_or_number(h, "validation.simulation_horizon");
    }
    if (const YAML::Node fh = v["finite_horizons"]) {
      if (!fh.IsSequence()) fail_at(fh, "validation.finite_horizons must be a list");
      for (const auto& t : fh) vc.finite_horizons.push_back(scalar<double>(t, "validation.finite_horizons entry"));
    }
    read(v, "descent_tolerance", vc.descent_tolerance, "validation");
    read(v, "step", vc.step, "validation");
    read(v, "workers", vc.workers, "validation");
    read(v, "exit_time_samples", c.exit_time_samples, "validation");
    read(v, "exit_time_horizon", c.exit_time_horizon, "validation");
  }
  if (const YAML::Node o = root["output"]) {
    check_keys(o, {"directory", "grid", "grid_anchor"}, "output");
    read(o, "directory", c.output_directory, "output");
    read(o, "grid", c.grid, "output");
    if (const YAML::Node a = o["grid_anchor"]) {
      if (!a.IsSequence()) fail_at(a, "output.grid_anchor must be a list");
      for (const auto& x : a) c.grid_anchor.push_back(scalar<double>(x, "output.grid_anchor entry"));
    }
  }
  c.validation.seed = c.seed;

  try {
    check_run_config(c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_run_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void check_run_config(const RunConfig& c) {
  const int n = c.dimension;
  if (n < 1) throw std::invalid_argument("dimension must be positive");
  if (static_cast<int>(c.dynamics.size()) != n) {
    throw std::invalid_argument("dynamics has " + std::to_string(c.dynamics.size()) + " components for dimension " +
                                std::to_string(n));
  }
  if (c.constraints.empty()) throw std::invalid_argument("constraints must not be empty");
  const SemialgebraicSet X(c.constraints);
  if (!X.ball_index()) {
    throw std::invalid_argument("constraints must include a ball R^2 - x1^2 - ... - xn^2");
  }
  const int first = c.k_min.value_or(X.k_min());
  if (first < X.k_min()) {
    throw std::invalid_argument("hierarchy.k_min = " + std::to_string(first) + " is below the set's k_min = " +
                                std::to_string(X.k_min()));
  }
  if (c.k_max < first) {
    throw std::invalid_argument("hierarchy.k_max = " + std::to_string(c.k_max) + " is below k_min = " +
                                std::to_string(first));
  }
  if (c.time_bound && !(*c.time_bound > 0.0)) throw std::invalid_argument("time_bound must be positive or auto");
  if (c.grid == 1 || c.grid < 0) throw std::invalid_argument("output.grid must be 0 or at least 2");
  if (!c.grid_anchor.empty() && static_cast<int>(c.grid_anchor.size()) != std::max(0, n - 2)) {
    throw std::invalid_argument("output.grid_anchor needs one coordinate for each of x3..xn");
  }
  if (!(c.validation.step > 0.0)) throw std::invalid_argument("validation.step must be positive");
  if (c.validation.workers < 1) throw std::invalid_argument("validation.workers must be positive");
}

std::string to_yaml(const RunConfig& c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << c.name;
  out << YAML::Key << "dimension" << YAML::Value << c.dimension;
  out << YAML::Key << "dynamics" << YAML::Value << YAML::BeginSeq;
  for (const auto& p : c.dynamics) out << YAML::DoubleQuoted << p.to_string();
  out << YAML::EndSeq;
  out << YAML::Key << "constraints" << YAML::Value << YAML::BeginSeq;
  for (const auto& p : c.constraints) out << YAML::DoubleQuoted << p.to_string();
  out << YAML::EndSeq;
  out << YAML::Key << "hierarchy" << YAML::Value << YAML::BeginMap;
  if (c.k_min) out << YAML::Key << "k_min" << YAML::Value << *c.k_min;
  out << YAML::Key << "k_max" << YAML::Value << c.k_max << YAML::EndMap;
  out << YAML::Key << "time_bound" << YAML::Value;
  if (c.time_bound) {
    out << *c.time_bound;
  } else {
    out << "auto";
  }
  out << YAML::Key << "mode" << YAML::Value << to_string(c.mode);
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "solver" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "gap_tol" << YAML::Value << c.solver.gap_tol;
  out << YAML::Key << "feas_tol" << YAML::Value << c.solver.feas_tol;
  out << YAML::Key << "max_iter" << YAML::Value << c.solver.max_iter;
  out << YAML::Key << "verbose" << YAML::Value << c.solver.verbose << YAML::EndMap;
  out << YAML::Key << "moments" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "samples" << YAML::Value << c.moment_samples << YAML::EndMap;

  const auto& v = c.validation;
  out << YAML::Key << "validation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "enabled" << YAML::Value << c.validate;
  out << YAML::Key << "interior_samples" << YAML::Value << v.interior_samples;
  out << YAML::Key << "boundary_samples" << YAML::Value << v.boundary_samples;
  out << YAML::Key << "invariance_samples" << YAML::Value << v.invariance_samples;
  out << YAML::Key << "volume_samples" << YAML::Value << v.volume_samples;
  out << YAML::Key << "finite_horizon_samples" << YAML::Value << v.finite_horizon_samples;
  out << YAML::Key << "simulation_horizon" << YAML::Value;
  if (v.simulation_horizon) {
    out << *v.simulation_horizon;
  } else {
    out << "auto";
  }
  out << YAML::Key << "finite_horizons" << YAML::Value << YAML::Flow << v.finite_horizons;
  out << YAML::Key << "descent_tolerance" << YAML::Value << v.descent_tolerance;
  out << YAML::Key << "step" << YAML::Value << v.step;
  out << YAML::Key << "workers" << YAML::Value << v.workers;
  out << YAML::Key << "exit_time_samples" << YAML::Value << c.exit_time_samples;
  out << YAML::Key << "exit_time_horizon" << YAML::Value << c.exit_time_horizon;
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "directory" << YAML::Value << c.output_directory;
  out << YAML::Key << "grid" << YAML::Value << c.grid;
  out << YAML::Key << "grid_anchor" << YAML::Value << YAML::Flow << c.grid_anchor;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace innermpi

#include "innermpi/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace innermpi {

std::vector<GridRow> export_levelset_grid(const Certificate& cert, const SemialgebraicSet& X, int resolution,
                                          std::span<const double> anchor) {
  if (resolution < 2) throw std::invalid_argument("export_levelset_grid: resolution must be at least 2");
  const int n = X.dimension();
  if (n < 2) throw std::invalid_argument("export_levelset_grid: needs at least two dimensions");
  if (!anchor.empty() && static_cast<int>(anchor.size()) != n - 2) {
    throw std::invalid_argument("export_levelset_grid: anchor must fix x3..xn");
  }
  const double R = X.ball_index() ? X.ball_radius() : 1.0;
  const CompiledPolynomial v(cert.v);
  std::vector<GridRow> rows;
  rows.reserve(static_cast<std::size_t>(resolution) * resolution);
  Point x(n, 0.0);
  for (int j = 2; j < n && !anchor.empty(); ++j) x[j] = anchor[j - 2];
  for (int r = 0; r < resolution; ++r) {
    x[1] = -R + 2.0 * R * r / (resolution - 1);
    for (int c = 0; c < resolution; ++c) {
      x[0] = -R + 2.0 * R * c / (resolution - 1);
      rows.push_back({x[0], x[1], v(x), X.contains(x) == Membership::Interior});
    }
  }
  return rows;
}

void write_levelset_csv(std::ostream& out, const std::vector<GridRow>& rows) {
  out << "x1,x2,v,member\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d\n", r.x1, r.x2, r.v, r.member ? 1 : 0);
    out << buf;
  }
}

namespace {

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

nlohmann::json certificate_summary(const Certificate& c) {
  return {{"k", c.k},
          {"mode", to_string(c.mode)},
          {"status", to_string(c.stats.status)},
          {"objective", c.objective},
          {"moment_value", c.moment_value},
          {"relative_gap", c.stats.relative_gap},
          {"u", c.u},
          {"degenerate", c.degenerate},
          {"ill_conditioned", c.ill_conditioned},
          {"infinite_horizon", c.infinite_horizon()},
          {"iterations", c.stats.iterations},
          {"seconds", c.stats.seconds}};
}

nlohmann::json hierarchy_summary(const HierarchyRun& run) {
  nlohmann::json certs = nlohmann::json::array();
  for (const auto& c : run.certificates) certs.push_back(certificate_summary(c));
  return {{"mode", to_string(run.mode)},
          {"T", run.T},
          {"certificates", certs},
          {"monotonicity_violations", run.monotonicity_violations},
          {"u_increases", run.u_increases}};
}

}  // namespace

nlohmann::json summary_json(const RunConfig& config, const RunResult& result) {
  nlohmann::json j;
  j["format"] = "innermpi-summary";
  j["version"] = 1;
  j["name"] = config.name;
  j["mode"] = to_string(config.mode);
  j["seed"] = config.seed;
  j["T"] = result.T;
  j["T_selection"] = config.time_bound ? "user" : "auto";
  if (result.exit_time) {
    const auto& e = *result.exit_time;
    j["exit_time"] = {{"tau_bar", e.tau_bar},
                      {"std_error", e.std_error},
                      {"censored_fraction", e.censored_fraction},
                      {"censoring_flagged", e.censoring_flagged()},
                      {"late_exit_fraction", e.late_exit_fraction},
                      {"samples", e.samples},
                      {"horizon", e.horizon}};
  }
  if (result.slack) j["slack"] = hierarchy_summary(*result.slack);
  if (result.forced) j["forced"] = hierarchy_summary(*result.forced);
  nlohmann::json val = nlohmann::json::array();
  for (const auto& r : result.validations) {
    val.push_back({{"k", r.k},
                   {"mode", to_string(r.mode)},
                   {"vacuous", r.vacuous},
                   {"residuals_passed", r.residuals_passed()},
                   {"invariance_tested", r.invariance.tested},
                   {"invariance_failures", r.invariance.failures()},
                   {"finite_horizon_passed", r.finite_horizon_passed()},
                   {"volume", r.volume.value},
                   {"volume_std_error", r.volume.std_error}});
  }
  j["validation"] = val;
  j["exit_status"] = result.exit_status;
  return j;
}

RunResult run(const RunConfig& config, std::ostream& log) {
  check_run_config(config);
  namespace fs = std::filesystem;
  const fs::path dir(config.output_directory);
  fs::create_directories(dir);

  RunResult result;
  const OdeSystem system(config.dynamics);
  const SemialgebraicSet X(config.constraints);
  std::vector<int> orders(config.k_max - config.first_order() + 1);
  std::iota(orders.begin(), orders.end(), config.first_order());
  const MonteCarloOptions mc{config.moment_samples, config.seed, config.validation.workers};
  ValidationConfig vconf = config.validation;
  vconf.seed = config.seed;

  const bool needs_T = config.mode != RunMode::Forced;
  const bool auto_T = needs_T && !config.time_bound;
  auto write_summary = [&] { write_json(dir / "summary.json", summary_json(config, result)); };

  try {
    if (auto_T || (config.validate && config.exit_time_samples > 0)) {
      result.exit_time = estimate_avg_exit_time(system, X, std::max<std::size_t>(config.exit_time_samples, 1),
                                                config.exit_time_horizon, config.seed, vconf.step, vconf.workers);
      const auto& e = *result.exit_time;
      log << "average exit time " << e.tau_bar << " +- " << e.std_error << " (censored "
          << 100.0 * e.censored_fraction << "%" << (e.censoring_flagged() ? ", flagged" : "") << ")\n";
    }
    result.T = config.time_bound.value_or(0.0);
    if (auto_T) {
      result.T = auto_time_bound(*result.exit_time);
      log << "time bound T = 2 tau_bar = " << result.T << "\n";
    }
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    result.exit_status = kExitRuntimeError;
    write_summary();
    return result;
  }

  bool all_optimal = true;
  bool invariance_ok = true;
  auto handle = [&](const Certificate& c, const std::string& suffix) {
    const std::string tag = std::to_string(c.k) + suffix;
    log << "k = " << c.k << " [" << to_string(c.mode) << "] " << to_string(c.stats.status)
        << "  objective " << c.objective << "  gap " << c.stats.relative_gap << "  u " << c.u
        << (c.degenerate ? "  degenerate" : "") << (c.ill_conditioned ? "  ill-conditioned" : "") << "  ("
        << c.stats.seconds << " s)\n";
    all_optimal = all_optimal && c.optimal();
    write_json(dir / ("certificate_k" + tag + ".json"), certificate_to_json(c));
    if (config.grid >= 2) {
      std::ofstream csv(dir / ("levelset_k" + tag + ".csv"));
      write_levelset_csv(csv, export_levelset_grid(c, X, config.grid, config.grid_anchor));
    }
    if (config.validate) {
      ValidationReport rep = validate_certificate(c, system, X, vconf);
      rep.exit_time = result.exit_time;
      invariance_ok = invariance_ok && rep.invariance_passed();
      log << "  validation: residuals " << (rep.residuals_passed() ? "pass" : "FAIL") << ", invariance "
          << rep.invariance.tested - rep.invariance.failures() << "/" << rep.invariance.tested << " pass"
          << (rep.vacuous ? " (vacuous)" : "") << ", volume " << rep.volume.value << " +- " << rep.volume.std_error
          << "\n";
      write_json(dir / ("validation_k" + tag + ".json"), validation_to_json(rep));
      result.validations.push_back(std::move(rep));
    }
  };

  try {
    if (config.mode != RunMode::Forced) {
      result.slack = run_hierarchy(system, X, orders, result.T, CertificateMode::SlackU, config.solver, mc,
                                   [&](const Certificate& c) { handle(c, ""); });
    }
    std::vector<int> forced_orders;
    if (config.mode == RunMode::Forced) {
      forced_orders = orders;
    } else if (config.mode == RunMode::Both) {
      for (const auto& c : result.slack->certificates) {
        if (c.u <= kUNearZero) forced_orders.push_back(c.k);
      }
      if (forced_orders.empty()) log << "no order reached u <= " << kUNearZero << "; forced re-solve skipped\n";
    }
    if (!forced_orders.empty()) {
      const std::string suffix = config.mode == RunMode::Both ? "_forced" : "";
      result.forced = run_hierarchy(system, X, forced_orders, result.T, CertificateMode::ForcedUZero, config.solver,
                                    mc, [&](const Certificate& c) { handle(c, suffix); });
    }
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    result.exit_status = kExitRuntimeError;
    write_summary();
    return result;
  }

  for (const HierarchyRun* h : {result.slack ? &*result.slack : nullptr, result.forced ? &*result.forced : nullptr}) {
    if (!h) continue;
    for (int k : h->monotonicity_violations) log << "warning: objective increased at k = " << k << "\n";
    for (int k : h->u_increases) log << "warning: u increased at k = " << k << "\n";
  }
  result.exit_status = all_optimal && invariance_ok ? kExitOk : kExitFailedChecks;
  write_summary();
  return result;
}

}  // namespace innermpi

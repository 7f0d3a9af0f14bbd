#include "innermpi/hierarchy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace innermpi {

OdeSystem::OdeSystem(std::vector<Polynomial> f) : f_(std::move(f)) {
  if (f_.empty()) throw std::invalid_argument("OdeSystem: empty vector field");
  const int n = dimension();
  for (const auto& fi : f_) {
    if (fi.dimension() != n) throw std::invalid_argument("OdeSystem: component dimension differs from state dimension");
    degree_ = std::max(degree_, fi.total_degree());
    compiled_.emplace_back(fi);
  }
}

void OdeSystem::eval(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < compiled_.size(); ++i) out[i] = compiled_[i].eval(x);
}

const char* to_string(CertificateMode m) {
  return m == CertificateMode::SlackU ? "slack-u" : "forced-u-zero";
}

CertificateMode parse_certificate_mode(const std::string& s) {
  if (s == "slack-u" || s == "slack") return CertificateMode::SlackU;
  if (s == "forced-u-zero" || s == "forced") return CertificateMode::ForcedUZero;
  throw std::invalid_argument("unknown certificate mode '" + s + "'");
}

Tightening build_tightening(const OdeSystem& system, const SemialgebraicSet& X, int k, double T,
                            CertificateMode mode, const MonteCarloOptions& mc) {
  const int n = X.dimension();
  if (system.dimension() != n) throw std::invalid_argument("build_tightening: system and set dimensions differ");
  if (!X.ball_index()) throw std::invalid_argument("build_tightening: X lacks a ball constraint R^2 - |x|^2");
  if (k < X.k_min()) {
    throw std::invalid_argument("build_tightening: order " + std::to_string(k) + " is below k_min = " +
                                std::to_string(X.k_min()));
  }
  if (mode == CertificateMode::SlackU && !(T > 0.0)) throw std::invalid_argument("build_tightening: T must be positive");

  Tightening t;
  t.k = k;
  t.mode = mode;
  t.T = mode == CertificateMode::SlackU ? T : 0.0;
  t.program = SosProgram(n);
  SosProgram& prog = t.program;
  const auto& g = X.constraints();
  const auto& kg = X.half_degrees();
  const auto& dg = X.degrees();

  t.v = prog.declare_poly("v", 2 * k);
  t.w = prog.declare_poly("w", 2 * k);
  if (mode == CertificateMode::SlackU) t.u = prog.declare_nonneg("u");

  int multiplier_degree = 0;
  for (std::size_t i = 0; i < g.size(); ++i) multiplier_degree = std::max(multiplier_degree, 2 * (k - kg[i]) + dg[i]);

  // Adds lhs = sigma_0 + sum_i m_i g_i with m_i SOS, or with m_i a free
  // polynomial standing for t_i+ - t_i- (every polynomial of degree 2m is a
  // difference of SOS polynomials of degree 2m). The Gram basis of sigma_0
  // is pruned to half the Newton polytope of lhs - sum_i m_i g_i, which
  // leaves the set of representable polynomials unchanged.
  auto putinar = [&](const std::string& name, const AffinePoly& lhs, int side_degree, bool signed_pairs,
                     const std::string& label) {
    AffinePoly rhs(n);
    std::vector<SosVar> declared;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const int cap = 2 * (k - kg[i]);
      const std::string idx = std::to_string(i + 1);
      if (signed_pairs) {
        PolyVar diff = prog.declare_poly(name + idx + "+-", cap);
        rhs += diff.expr * g[i];
        t.signed_multipliers.push_back(diff);
      } else {
        SosVar s = prog.declare_sos(name + idx, cap);
        rhs += s.expr * g[i];
        declared.push_back(s);
      }
    }
    const int half = free_sos_cap(std::max(side_degree, multiplier_degree)) / 2;
    auto basis = newton_half_basis(affine_support(lhs - rhs), n, half);
    if (!basis.empty()) {
      SosVar s0 = prog.declare_sos(name + "0", std::move(basis));
      rhs += s0.expr;
      t.multipliers.push_back(s0);
    }
    t.multipliers.insert(t.multipliers.end(), declared.begin(), declared.end());
    prog.add_identity(lhs, rhs, label);
  };

  const Polynomial one = Polynomial::constant(n, 1.0);
  AffinePoly lhs1 = -t.v.expr.lie_derivative(system.field());
  if (t.u) lhs1 += AffinePoly::variable(t.u->id, one);
  putinar("q", lhs1, 2 * k + system.degree() - 1, false, "u - grad(v).f");
  putinar("p", t.w.expr - t.v.expr - one, 2 * k, false, "w - v - 1");
  putinar("s", t.w.expr, 2 * k, false, "w");
  putinar("t", t.v.expr, 2 * k, true, "v");

  t.moments = moment_vector(X, 2 * k, mc);
  AffineScalar objective;
  for (std::size_t j = 0; j < t.w.coefficients.size(); ++j) {
    if (t.moments.values[j] != 0.0) objective.terms[t.w.coefficients[j]] += t.moments.values[j];
  }
  if (t.u) objective.terms[t.u->id] += T * t.moments.mass();
  prog.set_objective(objective);
  return t;
}

Certificate certificate_from_solution(const Tightening& t, const SdpProblem& problem, const SdpSolution& sol) {
  Certificate c;
  c.k = t.k;
  c.mode = t.mode;
  c.T = t.T;
  const auto values = t.program.program_values(sol.x);
  c.v = t.v.value(values);
  c.w = t.w.value(values);
  if (t.u) {
    c.u = values[t.u->id];
    if (c.u < 0.0 && c.u >= -1e-12) c.u = 0.0;
  }
  c.objective = sol.primal_objective;
  c.moment_value = sol.dual_objective;
  c.stats.status = sol.status;
  c.stats.iterations = sol.iterations;
  c.stats.primal_residual = sol.primal_residual;
  c.stats.dual_residual = sol.dual_residual;
  c.stats.relative_gap = sol.relative_gap;
  c.stats.min_gram_eigenvalue = check_solution(problem, sol).min_eigenvalue;
  c.stats.message = sol.message;
  c.degenerate = c.v.max_abs_coefficient() < kDegenerateCoefficient;
  c.ill_conditioned = std::max(c.v.max_abs_coefficient(), c.w.max_abs_coefficient()) > kConditioningWarning;
  return c;
}

Certificate solve_tightening(const Tightening& t, const SolverOptions& options) {
  const SdpProblem problem = t.program.compile();
  const auto start = std::chrono::steady_clock::now();
  const SdpSolution sol = solve(problem, options);
  const auto stop = std::chrono::steady_clock::now();
  Certificate c = certificate_from_solution(t, problem, sol);
  c.stats.seconds = std::chrono::duration<double>(stop - start).count();
  return c;
}

bool inner_set_membership(const Certificate& cert, const SemialgebraicSet& X, std::span<const double> x,
                          std::optional<double> t) {
  if (static_cast<int>(x.size()) != X.dimension()) return false;
  if (X.contains(x) != Membership::Interior) return false;
  const double vx = cert.v.eval(x);
  return t ? vx + cert.u * *t < 0.0 : vx < 0.0;
}

namespace {

nlohmann::json coefficients_json(const Polynomial& p, const std::vector<Monomial>& basis) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& m : basis) a.push_back(p.coefficient(m));
  return a;
}

Polynomial polynomial_from_json(const nlohmann::json& coeffs, const std::vector<Monomial>& basis, int n) {
  if (coeffs.size() != basis.size()) throw std::runtime_error("certificate: coefficient count does not match basis");
  Polynomial p(n);
  for (std::size_t j = 0; j < basis.size(); ++j) p += Polynomial::monomial(basis[j], coeffs[j].get<double>());
  return p;
}

SolveStatus parse_status(const std::string& s) {
  for (auto st : {SolveStatus::Optimal, SolveStatus::PrimalInfeasible, SolveStatus::DualInfeasible, SolveStatus::MaxIter,
                  SolveStatus::NumericalTrouble}) {
    if (s == to_string(st)) return st;
  }
  throw std::runtime_error("certificate: unknown solver status '" + s + "'");
}

}  // namespace

nlohmann::json certificate_to_json(const Certificate& cert) {
  const int n = cert.v.dimension();
  const auto basis = monomial_basis(n, 2 * cert.k);
  nlohmann::json j;
  j["format"] = "innermpi-certificate";
  j["version"] = 1;
  j["n"] = n;
  j["k"] = cert.k;
  j["mode"] = to_string(cert.mode);
  j["T"] = cert.T;
  j["u"] = cert.u;
  j["objective"] = cert.objective;
  j["moment_value"] = cert.moment_value;
  nlohmann::json b = nlohmann::json::array();
  for (const auto& m : basis) b.push_back(m.exponents());
  j["basis"] = b;
  j["v"] = coefficients_json(cert.v, basis);
  j["w"] = coefficients_json(cert.w, basis);
  j["degenerate"] = cert.degenerate;
  j["ill_conditioned"] = cert.ill_conditioned;
  j["infinite_horizon"] = cert.infinite_horizon();
  j["solver"] = {{"status", to_string(cert.stats.status)},
                 {"iterations", cert.stats.iterations},
                 {"primal_residual", cert.stats.primal_residual},
                 {"dual_residual", cert.stats.dual_residual},
                 {"relative_gap", cert.stats.relative_gap},
                 {"min_gram_eigenvalue", cert.stats.min_gram_eigenvalue},
                 {"seconds", cert.stats.seconds},
                 {"message", cert.stats.message}};
  return j;
}

Certificate certificate_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "innermpi-certificate") throw std::runtime_error("certificate: unrecognized format");
  if (j.value("version", 0) != 1) throw std::runtime_error("certificate: unsupported version");
  Certificate c;
  const int n = j.at("n").get<int>();
  c.k = j.at("k").get<int>();
  const auto basis = monomial_basis(n, 2 * c.k);
  c.mode = parse_certificate_mode(j.at("mode").get<std::string>());
  c.T = j.at("T").get<double>();
  c.u = j.at("u").get<double>();
  c.objective = j.at("objective").get<double>();
  c.moment_value = j.at("moment_value").get<double>();
  c.v = polynomial_from_json(j.at("v"), basis, n);
  c.w = polynomial_from_json(j.at("w"), basis, n);
  c.degenerate = j.at("degenerate").get<bool>();
  c.ill_conditioned = j.at("ill_conditioned").get<bool>();
  const auto& s = j.at("solver");
  c.stats.status = parse_status(s.at("status").get<std::string>());
  c.stats.iterations = s.at("iterations").get<int>();
  c.stats.primal_residual = s.at("primal_residual").get<double>();
  c.stats.dual_residual = s.at("dual_residual").get<double>();
  c.stats.relative_gap = s.at("relative_gap").get<double>();
  c.stats.min_gram_eigenvalue = s.at("min_gram_eigenvalue").get<double>();
  c.stats.seconds = s.at("seconds").get<double>();
  c.stats.message = s.at("message").get<std::string>();
  return c;
}

HierarchyRun run_hierarchy(const OdeSystem& system, const SemialgebraicSet& X, std::span<const int> orders, double T,
                           CertificateMode mode, const SolverOptions& options, const MonteCarloOptions& mc,
                           const std::function<void(const Certificate&)>& on_certificate) {
  if (orders.empty()) throw std::invalid_argument("run_hierarchy: empty order range");
  for (std::size_t i = 1; i < orders.size(); ++i) {
    if (orders[i] <= orders[i - 1]) throw std::invalid_argument("run_hierarchy: orders must be strictly increasing");
  }
  HierarchyRun run;
  run.mode = mode;
  run.T = mode == CertificateMode::SlackU ? T : 0.0;
  for (int k : orders) {
    run.certificates.push_back(solve_tightening(build_tightening(system, X, k, T, mode, mc), options));
    if (on_certificate) on_certificate(run.certificates.back());
  }
  for (std::size_t i = 1; i < run.certificates.size(); ++i) {
    const auto& prev = run.certificates[i - 1];
    const auto& cur = run.certificates[i];
    if (!prev.optimal() || !cur.optimal()) continue;
    if (cur.objective > prev.objective + 1e-6 * (1.0 + std::abs(prev.objective))) {
      run.monotonicity_violations.push_back(cur.k);
    }
    if (mode == CertificateMode::SlackU && cur.u > prev.u + kUIncreaseTolerance) run.u_increases.push_back(cur.k);
  }
  return run;
}

}  // namespace innermpi

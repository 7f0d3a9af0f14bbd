#include "innermpi/sos_program.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "innermpi/moments.hpp"
#include "innermpi/sdp_solver.hpp"

namespace innermpi {

AffinePoly AffinePoly::variable(VarId id, Polynomial coefficient) {
  AffinePoly p(coefficient.dimension());
  if (!coefficient.is_zero()) p.terms_.emplace(id, std::move(coefficient));
  return p;
}

int AffinePoly::max_degree() const {
  int d = constant_.is_zero() ? 0 : constant_.total_degree();
  for (const auto& [id, c] : terms_) d = std::max(d, c.total_degree());
  return d;
}

AffinePoly& AffinePoly::operator+=(const AffinePoly& other) {
  if (other.dimension() != dimension()) throw std::invalid_argument("AffinePoly: dimension mismatch");
  constant_ += other.constant_;
  for (const auto& [id, c] : other.terms_) {
    auto [it, inserted] = terms_.try_emplace(id, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }
  return *this;
}

AffinePoly& AffinePoly::operator-=(const AffinePoly& other) { return *this += -1.0 * other; }

AffinePoly& AffinePoly::operator*=(double c) {
  constant_ *= c;
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= c;
    it = it->second.is_zero() ? terms_.erase(it) : std::next(it);
  }
  return *this;
}

AffinePoly& AffinePoly::operator*=(const Polynomial& p) {
  constant_ = constant_ * p;
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second = it->second * p;
    it = it->second.is_zero() ? terms_.erase(it) : std::next(it);
  }
  return *this;
}

AffinePoly AffinePoly::lie_derivative(std::span<const Polynomial> f) const {
  AffinePoly r(innermpi::lie_derivative(constant_, f));
  for (const auto& [id, c] : terms_) r += variable(id, innermpi::lie_derivative(c, f));
  return r;
}

Polynomial AffinePoly::evaluate(std::span<const double> values) const {
  Polynomial p = constant_;
  for (const auto& [id, c] : terms_) {
    if (id < 0 || static_cast<std::size_t>(id) >= values.size()) {
      throw std::out_of_range("AffinePoly::evaluate: missing variable value");
    }
    p += c * values[id];
  }
  return p;
}

AffineScalar& AffineScalar::operator+=(const AffineScalar& other) {
  for (const auto& [id, c] : other.terms) terms[id] += c;
  constant += other.constant;
  return *this;
}

AffineScalar operator*(double c, AffineScalar a) {
  for (auto& [id, v] : a.terms) v *= c;
  a.constant *= c;
  return a;
}

double AffineScalar::evaluate(std::span<const double> values) const {
  double s = constant;
  for (const auto& [id, c] : terms) s += c * values[id];
  return s;
}

std::vector<Monomial> affine_support(const AffinePoly& p) {
  std::set<Monomial> s;
  for (const auto& [m, c] : p.constant().terms()) s.insert(m);
  for (const auto& [id, poly] : p.terms()) {
    for (const auto& [m, c] : poly.terms()) s.insert(m);
  }
  return {s.begin(), s.end()};
}

namespace {

// Hull membership as the LP  lambda >= 0, sum lambda = 1, sum lambda_j s_j = p.
// Only a certified infeasibility excludes the point.
bool in_hull(const std::vector<Monomial>& support, const std::vector<int>& point) {
  const int n = static_cast<int>(point.size());
  SdpProblem lp;
  lp.nonneg_count = static_cast<int>(support.size());
  lp.rows.resize(n + 1);
  for (int j = 0; j < lp.nonneg_count; ++j) {
    lp.rows[0].entries.push_back({j, 1.0});
    for (int i = 0; i < n; ++i) {
      if (support[j][i] != 0) lp.rows[i + 1].entries.push_back({j, static_cast<double>(support[j][i])});
    }
  }
  lp.rows[0].rhs = 1.0;
  for (int i = 0; i < n; ++i) lp.rows[i + 1].rhs = point[i];
  return solve(lp).status != SolveStatus::PrimalInfeasible;
}

}  // namespace

std::vector<Monomial> newton_half_basis(const std::vector<Monomial>& support, int n, int half_degree) {
  std::vector<Monomial> basis;
  if (support.empty()) return basis;
  const std::set<Monomial> lookup(support.begin(), support.end());
  std::vector<int> hi(n, 0);
  int max_degree = 0;
  for (const auto& s : support) {
    for (int i = 0; i < n; ++i) hi[i] = std::max(hi[i], s[i]);
    max_degree = std::max(max_degree, s.degree());
  }
  for (const auto& m : monomial_basis(n, half_degree)) {
    const Monomial twice = m * m;
    if (lookup.count(twice)) {
      basis.push_back(m);
      continue;
    }
    bool outside = twice.degree() > max_degree;
    for (int i = 0; i < n && !outside; ++i) outside = twice[i] > hi[i];
    if (!outside && in_hull(support, twice.exponents())) basis.push_back(m);
  }
  return basis;
}

SosProgram::SosProgram(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("SosProgram: dimension must be positive");
}

VarId SosProgram::new_var(VarKind kind, const std::string& owner, int block, int row, int col) {
  const VarId id = static_cast<VarId>(vars_.size());
  vars_.push_back({id, kind, block, row, col, owner});
  return id;
}

void SosProgram::check_name(const std::string& name) {
  if (std::find(names_.begin(), names_.end(), name) != names_.end()) {
    throw std::invalid_argument("SosProgram: duplicate variable name '" + name + "'");
  }
  names_.push_back(name);
}

PolyVar SosProgram::declare_poly(const std::string& name, int degree_cap) {
  if (degree_cap < 0) throw std::invalid_argument("declare_poly: negative degree cap");
  check_name(name);
  PolyVar v;
  v.name = name;
  v.degree = degree_cap;
  v.basis = monomial_basis(n_, degree_cap);
  v.expr = AffinePoly(n_);
  for (const auto& m : v.basis) {
    const VarId id = new_var(VarKind::Free, name);
    v.coefficients.push_back(id);
    v.expr += AffinePoly::variable(id, Polynomial::monomial(m));
  }
  return v;
}

SosVar SosProgram::declare_sos(const std::string& name, int degree_cap) {
  if (degree_cap < 0 || degree_cap % 2 != 0) {
    throw std::invalid_argument("declare_sos: degree cap must be even and non-negative");
  }
  return declare_sos(name, monomial_basis(n_, degree_cap / 2));
}

SosVar SosProgram::declare_sos(const std::string& name, std::vector<Monomial> basis) {
  if (basis.empty()) throw std::invalid_argument("declare_sos: empty basis");
  int half = 0;
  for (const auto& m : basis) {
    if (m.dimension() != n_) throw std::invalid_argument("declare_sos: basis dimension mismatch");
    half = std::max(half, m.degree());
  }
  check_name(name);
  SosVar s;
  s.name = name;
  s.degree = 2 * half;
  s.block = static_cast<int>(blocks_.size());
  s.basis = std::move(basis);
  const int d = static_cast<int>(s.basis.size());
  blocks_.push_back(d);
  s.expr = AffinePoly(n_);
  for (int r = 0; r < d; ++r) {
    for (int c = r; c < d; ++c) {
      const VarId id = new_var(VarKind::Gram, name, s.block, r, c);
      s.expr += AffinePoly::variable(id, Polynomial::monomial(s.basis[r] * s.basis[c], r == c ? 1.0 : 2.0));
    }
  }
  return s;
}

ScalarVar SosProgram::declare_nonneg(const std::string& name) {
  check_name(name);
  return ScalarVar{name, new_var(VarKind::Nonneg, name)};
}

ScalarVar SosProgram::declare_free(const std::string& name) {
  check_name(name);
  return ScalarVar{name, new_var(VarKind::Free, name)};
}

void SosProgram::check_expression(const AffinePoly& p) const {
  if (p.dimension() != n_) throw std::invalid_argument("SosProgram: expression dimension mismatch");
  for (const auto& [id, c] : p.terms()) {
    if (id < 0 || static_cast<std::size_t>(id) >= vars_.size()) {
      throw std::invalid_argument("SosProgram: expression references an undeclared variable");
    }
  }
}

void SosProgram::add_identity(const AffinePoly& lhs, const AffinePoly& rhs, const std::string& label) {
  check_expression(lhs);
  check_expression(rhs);
  identities_.push_back({label.empty() ? "identity " + std::to_string(identities_.size()) : label, lhs - rhs});
}

void SosProgram::set_objective(const AffineScalar& objective) {
  for (const auto& [id, c] : objective.terms) {
    if (id < 0 || static_cast<std::size_t>(id) >= vars_.size()) {
      throw std::invalid_argument("SosProgram: objective references an undeclared variable");
    }
  }
  objective_ = objective;
}

std::vector<int> SosProgram::sdp_variable_map() const {
  std::vector<int> map(vars_.size(), -1);
  int next = 0;
  for (VarKind kind : {VarKind::Free, VarKind::Nonneg}) {
    for (const auto& v : vars_) {
      if (v.kind == kind) map[v.id] = next++;
    }
  }
  // Gram entries are declared contiguously per block in row-major upper
  // triangle order, which is exactly the SdpProblem layout.
  for (int b = 0; b < static_cast<int>(blocks_.size()); ++b) {
    for (const auto& v : vars_) {
      if (v.kind == VarKind::Gram && v.block == b) map[v.id] = next++;
    }
  }
  return map;
}

std::vector<double> SosProgram::program_values(std::span<const double> sdp_values) const {
  const auto map = sdp_variable_map();
  std::vector<double> values(vars_.size());
  for (std::size_t i = 0; i < vars_.size(); ++i) values[i] = sdp_values[map[i]];
  return values;
}

std::map<Monomial, std::vector<SparseEntry>> SosProgram::match_coefficients(
    const Identity& id, const std::vector<int>& map, std::map<Monomial, double>& rhs) const {
  std::map<Monomial, std::vector<SparseEntry>> rows;
  for (const auto& [m, c] : id.residual.constant().terms()) {
    rows[m];
    rhs[m] = -c;
  }
  for (const auto& [var, poly] : id.residual.terms()) {
    for (const auto& [m, c] : poly.terms()) rows[m].push_back({map[var], c});
  }
  for (auto& [m, entries] : rows) {
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.var < b.var; });
  }
  return rows;
}

std::vector<std::pair<int, int>> SosProgram::identity_rows() const {
  const auto map = sdp_variable_map();
  std::vector<std::pair<int, int>> ranges;
  int next = 0;
  for (const auto& id : identities_) {
    std::map<Monomial, double> rhs;
    const auto rows = match_coefficients(id, map, rhs);
    const int first = next;
    for (const auto& [m, entries] : rows) {
      if (!entries.empty() || rhs[m] != 0.0) ++next;
    }
    ranges.emplace_back(first, next);
  }
  return ranges;
}

SdpProblem SosProgram::compile() const {
  const auto map = sdp_variable_map();
  SdpProblem p;
  p.psd_blocks = blocks_;
  for (const auto& v : vars_) {
    if (v.kind == VarKind::Free) ++p.free_count;
    if (v.kind == VarKind::Nonneg) ++p.nonneg_count;
  }
  for (const auto& id : identities_) {
    std::map<Monomial, double> rhs;
    const auto rows = match_coefficients(id, map, rhs);
    for (const auto& [m, entries] : rows) {
      const double b = rhs.count(m) ? rhs.at(m) : 0.0;
      // Structurally empty rows (0 = 0) carry no information.
      if (entries.empty() && b == 0.0) continue;
      p.rows.push_back({entries, b});
    }
  }
  for (const auto& [id, c] : objective_.terms) {
    if (c != 0.0) p.objective.push_back({map[id], c});
  }
  std::sort(p.objective.begin(), p.objective.end(), [](const auto& a, const auto& b) { return a.var < b.var; });
  p.objective_constant = objective_.constant;
  p.validate();
  return p;
}

double SosProgram::max_row_coefficient() const {
  double r = 0.0;
  for (const auto& id : identities_) {
    r = std::max(r, id.residual.constant().max_abs_coefficient());
    for (const auto& [var, poly] : id.residual.terms()) r = std::max(r, poly.max_abs_coefficient());
  }
  return r;
}

}  // namespace innermpi

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "innermpi/polynomial.hpp"
#include "innermpi/sdp_problem.hpp"

namespace innermpi {

using VarId = int;

/// Polynomial expression that is affine in the scalar decision variables:
/// constant(x) + sum_j coeff_j(x) * z_j.
class AffinePoly {
 public:
  explicit AffinePoly(int n = 0) : constant_(n) {}
  explicit AffinePoly(Polynomial constant) : constant_(std::move(constant)) {}
  static AffinePoly variable(VarId id, Polynomial coefficient);

  int dimension() const { return constant_.dimension(); }
  const Polynomial& constant() const { return constant_; }
  const std::map<VarId, Polynomial>& terms() const { return terms_; }
  /// Largest total degree over the constant and every coefficient.
  int max_degree() const;

  AffinePoly& operator+=(const AffinePoly& other);
  AffinePoly& operator-=(const AffinePoly& other);
  AffinePoly& operator*=(double c);
  AffinePoly& operator*=(const Polynomial& p);

  friend AffinePoly operator+(AffinePoly a, const AffinePoly& b) { return a += b; }
  friend AffinePoly operator-(AffinePoly a, const AffinePoly& b) { return a -= b; }
  friend AffinePoly operator-(AffinePoly a) { return a *= -1.0; }
  friend AffinePoly operator*(AffinePoly a, double c) { return a *= c; }
  friend AffinePoly operator*(double c, AffinePoly a) { return a *= c; }
  friend AffinePoly operator*(AffinePoly a, const Polynomial& p) { return a *= p; }
  friend AffinePoly operator*(const Polynomial& p, AffinePoly a) { return a *= p; }
  friend AffinePoly operator+(AffinePoly a, const Polynomial& p) { return a += AffinePoly(p); }
  friend AffinePoly operator-(AffinePoly a, const Polynomial& p) { return a -= AffinePoly(p); }

  /// Applies v -> grad(v) . f coefficient-wise.
  AffinePoly lie_derivative(std::span<const Polynomial> f) const;

  /// Substitutes values[id] for every variable.
  Polynomial evaluate(std::span<const double> values) const;

 private:
  Polynomial constant_;
  std::map<VarId, Polynomial> terms_;
};

/// Affine scalar expression sum_j c_j z_j + c0.
struct AffineScalar {
  std::map<VarId, double> terms;
  double constant = 0.0;

  AffineScalar& operator+=(const AffineScalar& other);
  friend AffineScalar operator+(AffineScalar a, const AffineScalar& b) { return a += b; }
  friend AffineScalar operator*(double c, AffineScalar a);
  double evaluate(std::span<const double> values) const;
};

struct DecisionVar {
  VarId id = 0;
  VarKind kind = VarKind::Free;
  int block = -1;
  int row = -1;
  int col = -1;
  std::string owner;
};

struct ScalarVar {
  std::string name;
  VarId id = 0;
  AffineScalar scalar() const { return AffineScalar{{{id, 1.0}}, 0.0}; }
};

/// Polynomial with free coefficients over monomial_basis(n, degree).
struct PolyVar {
  std::string name;
  int degree = 0;
  std::vector<Monomial> basis;
  std::vector<VarId> coefficients;
  AffinePoly expr;

  Polynomial value(std::span<const double> values) const { return expr.evaluate(values); }
};

/// b(x)' Q b(x) with Q symmetric PSD over a monomial basis b.
struct SosVar {
  std::string name;
  int degree = 0;
  int block = 0;
  std::vector<Monomial> basis;
  AffinePoly expr;

  Polynomial value(std::span<const double> values) const { return expr.evaluate(values); }
};

struct Identity {
  std::string label;
  /// lhs - rhs; the identity holds iff this is the zero polynomial.
  AffinePoly residual;
};

/// Builder for polynomial identities with SOS-constrained unknowns, compiled
/// to a standard-form SDP by Gram-matrix modeling and coefficient matching.
/// Union of the monomial supports of the constant and every coefficient.
std::vector<Monomial> affine_support(const AffinePoly& p);

/// Monomials m with deg(m) <= half_degree and 2m in the convex hull of
/// support, in graded-lex order. Any SOS polynomial whose support lies in
/// support has a Gram representation over this basis.
std::vector<Monomial> newton_half_basis(const std::vector<Monomial>& support, int n, int half_degree);

class SosProgram {
 public:
  explicit SosProgram(int n);

  int dimension() const { return n_; }

  PolyVar declare_poly(const std::string& name, int degree_cap);
  SosVar declare_sos(const std::string& name, int degree_cap);
  /// SOS variable over an explicit nonempty monomial basis.
  SosVar declare_sos(const std::string& name, std::vector<Monomial> basis);
  ScalarVar declare_nonneg(const std::string& name);
  ScalarVar declare_free(const std::string& name);

  void add_identity(const AffinePoly& lhs, const AffinePoly& rhs, const std::string& label = {});
  void set_objective(const AffineScalar& objective);

  const std::vector<DecisionVar>& variables() const { return vars_; }
  const std::vector<int>& block_sizes() const { return blocks_; }
  const std::vector<Identity>& identities() const { return identities_; }
  const AffineScalar& objective() const { return objective_; }

  /// Position of every program variable in the compiled problem.
  std::vector<int> sdp_variable_map() const;
  /// Program-ordered values from a compiled-problem solution vector.
  std::vector<double> program_values(std::span<const double> sdp_values) const;
  /// Row range [first, last) of each identity in the compiled problem.
  std::vector<std::pair<int, int>> identity_rows() const;

  /// Deterministic: variables ordered free, nonneg, Gram (declaration order
  /// within each kind), rows ordered by identity then graded-lex monomial.
  SdpProblem compile() const;

  /// Largest |coefficient| among the compiled equality rows.
  double max_row_coefficient() const;

 private:
  VarId new_var(VarKind kind, const std::string& owner, int block = -1, int row = -1, int col = -1);
  void check_name(const std::string& name);
  void check_expression(const AffinePoly& p) const;
  std::map<Monomial, std::vector<SparseEntry>> match_coefficients(const Identity& id,
                                                                  const std::vector<int>& map,
                                                                  std::map<Monomial, double>& rhs) const;

  int n_;
  std::vector<DecisionVar> vars_;
  std::vector<int> blocks_;
  std::vector<std::string> names_;
  std::vector<Identity> identities_;
  AffineScalar objective_;
};

}  // namespace innermpi

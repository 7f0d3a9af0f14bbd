#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace innermpi {

/// Coefficients with magnitude below this are dropped after arithmetic.
inline constexpr double kCoefficientDropTolerance = 1e-14;

/// Exponent vector x1^a1 * ... * xn^an.
///
/// Ordering is graded lexicographic: total degree first, then the exponent
/// vectors compared lexicographically with larger leading exponents first,
/// so that for n = 2 the order reads 1, x1, x2, x1^2, x1*x2, x2^2, ...
class Monomial {
 public:
  Monomial() = default;
  explicit Monomial(std::vector<int> exponents);
  static Monomial one(int n) { return Monomial(std::vector<int>(n, 0)); }

  int dimension() const { return static_cast<int>(exponents_.size()); }
  int degree() const { return degree_; }
  const std::vector<int>& exponents() const { return exponents_; }
  int operator[](std::size_t i) const { return exponents_[i]; }

  Monomial operator*(const Monomial& other) const;

  bool operator==(const Monomial& other) const { return exponents_ == other.exponents_; }
  std::strong_ordering operator<=>(const Monomial& other) const;

  std::string to_string() const;

 private:
  std::vector<int> exponents_;
  int degree_ = 0;
};

/// Sparse multivariate polynomial with real coefficients in canonical form
/// (no stored zero coefficients).
class Polynomial {
 public:
  using Terms = std::map<Monomial, double>;

  explicit Polynomial(int n = 0) : n_(n) {}
  Polynomial(int n, Terms terms);

  static Polynomial constant(int n, double c);
  /// c * x_i (0-based index).
  static Polynomial variable(int n, int i, double c = 1.0);
  static Polynomial monomial(const Monomial& m, double c = 1.0);

  int dimension() const { return n_; }
  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }
  /// 0 for the zero polynomial.
  int total_degree() const;
  double coefficient(const Monomial& m) const;
  double max_abs_coefficient() const;

  double eval(std::span<const double> x) const;
  double operator()(std::span<const double> x) const { return eval(x); }

  Polynomial partial(int i) const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double c);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(Polynomial a) { return a *= -1.0; }
  friend Polynomial operator*(Polynomial a, double c) { return a *= c; }
  friend Polynomial operator*(double c, Polynomial a) { return a *= c; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  bool operator==(const Polynomial& other) const = default;

  /// Human readable form in the config grammar, e.g. "1 - x1^2 - x2^2".
  std::string to_string() const;

 private:
  void add_term(const Monomial& m, double c);
  void check_same_dimension(const Polynomial& other) const;

  int n_ = 0;
  Terms terms_;
};

Polynomial add(const Polynomial& a, const Polynomial& b);
Polynomial mul(const Polynomial& a, const Polynomial& b);
Polynomial partial(const Polynomial& p, int i);
double eval(const Polynomial& p, std::span<const double> x);

/// Sum_i dv/dx_i * f_i, the rate of change of v along the flow of f.
Polynomial lie_derivative(const Polynomial& v, std::span<const Polynomial> f);

/// Flattened polynomial for repeated evaluation in tight loops.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const Polynomial& p);

  int dimension() const { return n_; }
  double eval(std::span<const double> x) const;
  double operator()(std::span<const double> x) const { return eval(x); }

 private:
  int n_ = 0;
  int max_exponent_ = 0;
  std::vector<int> exponents_;  // row-major, size() == n_ * coefficients_.size()
  std::vector<double> coefficients_;
};

}  // namespace innermpi

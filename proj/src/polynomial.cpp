#include "innermpi/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace innermpi {

Monomial::Monomial(std::vector<int> exponents) : exponents_(std::move(exponents)) {
  for (int e : exponents_) {
    if (e < 0) throw std::invalid_argument("Monomial: negative exponent");
    degree_ += e;
  }
}

Monomial Monomial::operator*(const Monomial& other) const {
  if (other.dimension() != dimension()) throw std::invalid_argument("Monomial: dimension mismatch");
  std::vector<int> e(exponents_);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] += other.exponents_[i];
  return Monomial(std::move(e));
}

std::strong_ordering Monomial::operator<=>(const Monomial& other) const {
  if (auto c = degree_ <=> other.degree_; c != 0) return c;
  // Larger leading exponent sorts first within a degree.
  for (std::size_t i = 0; i < exponents_.size() && i < other.exponents_.size(); ++i) {
    if (exponents_[i] != other.exponents_[i]) return other.exponents_[i] <=> exponents_[i];
  }
  return exponents_.size() <=> other.exponents_.size();
}

std::string Monomial::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < exponents_.size(); ++i) {
    if (exponents_[i] == 0) continue;
    if (!first) os << '*';
    os << 'x' << (i + 1);
    if (exponents_[i] > 1) os << '^' << exponents_[i];
    first = false;
  }
  return first ? std::string("1") : os.str();
}

Polynomial::Polynomial(int n, Terms terms) : n_(n) {
  for (auto& [m, c] : terms) {
    if (m.dimension() != n) throw std::invalid_argument("Polynomial: monomial dimension mismatch");
    add_term(m, c);
  }
}

Polynomial Polynomial::constant(int n, double c) {
  Polynomial p(n);
  p.add_term(Monomial::one(n), c);
  return p;
}

Polynomial Polynomial::variable(int n, int i, double c) {
  if (i < 0 || i >= n) throw std::out_of_range("Polynomial::variable: index out of range");
  std::vector<int> e(n, 0);
  e[i] = 1;
  Polynomial p(n);
  p.add_term(Monomial(std::move(e)), c);
  return p;
}

Polynomial Polynomial::monomial(const Monomial& m, double c) {
  Polynomial p(m.dimension());
  p.add_term(m, c);
  return p;
}

int Polynomial::total_degree() const {
  int d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
  return d;
}

double Polynomial::coefficient(const Monomial& m) const {
  auto it = terms_.find(m);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::max_abs_coefficient() const {
  double r = 0.0;
  for (const auto& [m, c] : terms_) r = std::max(r, std::abs(c));
  return r;
}

double Polynomial::eval(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_) throw std::invalid_argument("Polynomial::eval: dimension mismatch");
  double sum = 0.0;
  for (const auto& [m, c] : terms_) {
    double t = c;
    for (int i = 0; i < n_; ++i) {
      for (int e = 0; e < m[i]; ++e) t *= x[i];
    }
    sum += t;
  }
  return sum;
}

Polynomial Polynomial::partial(int i) const {
  if (i < 0 || i >= n_) throw std::out_of_range("Polynomial::partial: index out of range");
  Polynomial d(n_);
  for (const auto& [m, c] : terms_) {
    if (m[i] == 0) continue;
    std::vector<int> e = m.exponents();
    const int k = e[i]--;
    d.add_term(Monomial(std::move(e)), c * k);
  }
  return d;
}

void Polynomial::add_term(const Monomial& m, double c) {
  if (c == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) it->second += c;
  if (std::abs(it->second) < kCoefficientDropTolerance) terms_.erase(it);
}

void Polynomial::check_same_dimension(const Polynomial& other) const {
  if (other.n_ != n_) throw std::invalid_argument("Polynomial: dimension mismatch");
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  check_same_dimension(other);
  for (const auto& [m, c] : other.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  check_same_dimension(other);
  for (const auto& [m, c] : other.terms_) add_term(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double c) {
  if (c == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto it = terms_.begin(); it != terms_.end();) {
    it->second *= c;
    if (std::abs(it->second) < kCoefficientDropTolerance) {
      it = terms_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  a.check_same_dimension(b);
  // Accumulate raw sums first so intermediate cancellation is exact before
  // the drop tolerance applies.
  std::map<Monomial, double> acc;
  for (const auto& [ma, ca] : a.terms_) {
    for (const auto& [mb, cb] : b.terms_) acc[ma * mb] += ca * cb;
  }
  Polynomial p(a.n_);
  for (const auto& [m, c] : acc) p.add_term(m, c);
  return p;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [m, c] : terms_) {
    double mag = std::abs(c);
    if (first) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    if (m.degree() == 0) {
      os << mag;
    } else if (mag == 1.0) {
      os << m.to_string();
    } else {
      os << mag << '*' << m.to_string();
    }
    first = false;
  }
  return os.str();
}

Polynomial add(const Polynomial& a, const Polynomial& b) { return a + b; }
Polynomial mul(const Polynomial& a, const Polynomial& b) { return a * b; }
Polynomial partial(const Polynomial& p, int i) { return p.partial(i); }
double eval(const Polynomial& p, std::span<const double> x) { return p.eval(x); }

Polynomial lie_derivative(const Polynomial& v, std::span<const Polynomial> f) {
  const int n = v.dimension();
  if (static_cast<int>(f.size()) != n) throw std::invalid_argument("lie_derivative: vector field length mismatch");
  Polynomial result(n);
  for (int i = 0; i < n; ++i) {
    if (f[i].dimension() != n) throw std::invalid_argument("lie_derivative: dimension mismatch");
    result += v.partial(i) * f[i];
  }
  return result;
}

CompiledPolynomial::CompiledPolynomial(const Polynomial& p) : n_(p.dimension()) {
  exponents_.reserve(p.size() * n_);
  coefficients_.reserve(p.size());
  for (const auto& [m, c] : p.terms()) {
    for (int i = 0; i < n_; ++i) {
      exponents_.push_back(m[i]);
      max_exponent_ = std::max(max_exponent_, m[i]);
    }
    coefficients_.push_back(c);
  }
}

double CompiledPolynomial::eval(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != n_) throw std::invalid_argument("CompiledPolynomial::eval: dimension mismatch");
  const int stride = max_exponent_ + 1;
  // Small dimension and degree at desk scale; a stack table avoids allocation.
  constexpr int kStackTable = 256;
  double stack_table[kStackTable];
  std::vector<double> heap_table;
  double* powers = stack_table;
  if (n_ * stride > kStackTable) {
    heap_table.resize(static_cast<std::size_t>(n_ * stride));
    powers = heap_table.data();
  }
  for (int i = 0; i < n_; ++i) {
    double* row = powers + i * stride;
    row[0] = 1.0;
    for (int e = 1; e < stride; ++e) row[e] = row[e - 1] * x[i];
  }
  double sum = 0.0;
  const int* e = exponents_.data();
  for (double c : coefficients_) {
    double t = c;
    for (int i = 0; i < n_; ++i) t *= powers[i * stride + e[i]];
    sum += t;
    e += n_;
  }
  return sum;
}

}  // namespace innermpi

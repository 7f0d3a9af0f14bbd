#include "innermpi/poly_parse.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

namespace innermpi {

namespace {

class Parser {
 public:
  Parser(std::string_view text, int n) : s_(text), n_(n) {}

  Polynomial parse() {
    Polynomial result(n_);
    skip_space();
    if (at_end()) fail("empty polynomial");
    bool first = true;
    while (!at_end()) {
      double sign = 1.0;
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1.0 : 1.0;
        ++pos_;
        skip_space();
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      result += parse_term() * sign;
      first = false;
    }
    return result;
  }

 private:
  Polynomial parse_term() {
    double coefficient = 1.0;
    std::vector<int> exps(n_, 0);
    bool any = false;
    while (true) {
      skip_space();
      if (at_end()) break;
      const char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        coefficient *= parse_number();
        if (match('^')) coefficient = std::pow(coefficient, parse_exponent());
      } else if (c == 'x') {
        const std::size_t start = pos_;
        ++pos_;
        if (at_end() || !std::isdigit(static_cast<unsigned char>(peek()))) fail("expected variable index after 'x'");
        const int idx = parse_integer();
        if (idx < 1 || idx > n_) {
          fail("variable x" + std::to_string(idx) + " outside x1..x" + std::to_string(n_), start);
        }
        exps[idx - 1] += match('^') ? parse_exponent() : 1;
      } else {
        break;
      }
      any = true;
      skip_space();
      if (match('*')) {
        skip_space();
        if (at_end() || !(std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.' || peek() == 'x')) {
          fail("expected factor after '*'");
        }
      }
    }
    if (!any) fail(at_end() ? "unexpected end of input" : std::string("unexpected character '") + peek() + "'");
    return Polynomial::monomial(Monomial(exps), coefficient);
  }

  double parse_number() {
    const char* begin = s_.data() + pos_;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, s_.data() + s_.size(), value);
    if (ec != std::errc()) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return value;
  }

  int parse_integer() {
    const char* begin = s_.data() + pos_;
    int value = 0;
    const auto [ptr, ec] = std::from_chars(begin, s_.data() + s_.size(), value);
    if (ec != std::errc()) fail("malformed integer");
    pos_ += static_cast<std::size_t>(ptr - begin);
    return value;
  }

  int parse_exponent() {
    skip_space();
    if (at_end() || !std::isdigit(static_cast<unsigned char>(peek()))) fail("expected nonnegative integer exponent");
    return parse_integer();
  }

  bool match(char c) {
    skip_space();
    if (!at_end() && peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }
  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }

  [[noreturn]] void fail(const std::string& what) const { fail(what, pos_); }
  [[noreturn]] void fail(const std::string& what, std::size_t at) const {
    throw PolynomialParseError("polynomial parse error at column " + std::to_string(at + 1) + ": " + what, at + 1);
  }

  std::string_view s_;
  int n_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial parse_polynomial(std::string_view text, int n) {
  if (n < 1) throw std::invalid_argument("parse_polynomial: dimension must be positive");
  return Parser(text, n).parse();
}

}  // namespace innermpi

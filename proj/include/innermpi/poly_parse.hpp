#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "innermpi/polynomial.hpp"

namespace innermpi {

/// Parse failure; column is 1-based within the parsed text.
class PolynomialParseError : public std::runtime_error {
 public:
  PolynomialParseError(const std::string& message, std::size_t column)
      : std::runtime_error(message), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// Parses a sum of terms `c * x1^a1 * ... * xn^an` over variables x1..xn.
/// Both `*` and `^1` may be omitted ("2x1x2^3"), repeated factors multiply,
/// and a term may carry several numeric factors.
Polynomial parse_polynomial(std::string_view text, int n);

}  // namespace innermpi

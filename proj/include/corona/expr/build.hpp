#pragma once

#include <optional>
#include <string>
#include <vector>

#include "corona/expr/graph.hpp"

namespace corona::expr {

// Hand construction of terms in the same shapes the templates produce.

struct Factor {
  std::string var;
  double exponent = 1.0;
};

struct LogFactor {
  std::vector<Factor> argument;
  double base = 10.0;
};

/// One denominator summand: sign * prod(factors) * [log factor]; with no
/// factors and no log it is the constant sign * 1.
struct Summand {
  Summand(double s, std::vector<Factor> f, std::optional<LogFactor> l = std::nullopt)
      : sign(s), factors(std::move(f)), log(std::move(l)) {}

  double sign = 1.0;
  std::vector<Factor> factors;
  std::optional<LogFactor> log;
};

Term product_term(double coefficient, const std::vector<Factor>& factors);
Term log_term(double coefficient, const LogFactor& log);
/// coefficient * prod(numerator) * (sum of summands)^-1
Term rational_term(double coefficient, const std::vector<Factor>& numerator,
                   const std::vector<Summand>& denominator);
Term constant_term(double coefficient);

inline ExprGraph sum_of(const std::vector<Term>& terms) { return join_terms(terms); }

}  // namespace corona::expr

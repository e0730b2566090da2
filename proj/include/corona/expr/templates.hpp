#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corona/expr/graph.hpp"
#include "corona/random.hpp"

namespace corona::expr {

enum class TemplateKind { Polynomial, Rational, Logarithmic, Constant };

inline constexpr std::array<TemplateKind, 4> kAllTemplateKinds = {
    TemplateKind::Polynomial, TemplateKind::Rational, TemplateKind::Logarithmic,
    TemplateKind::Constant};

std::string_view to_string(TemplateKind kind) noexcept;

/// Integers in [-3, 3] without 0.
std::vector<int> default_exponent_alphabet();
std::vector<int> exponent_alphabet(int lo, int hi);

struct TemplateOptions {
  std::vector<int> exponents = default_exponent_alphabet();
  bool allow_log = true;      // log factors anywhere in a term
  bool allow_pow = true;      // without pow, exponents collapse to 1 and no reciprocals
  std::size_t max_factors = 3;
};

/// One term of the requested kind. The body root is a Mul node (or a Const
/// node for ConstantTerm); the coefficient starts at 1 and is set by the
/// fitter.
///  - Polynomial:  Mul over 1..3 Pow(Var) factors
///  - Rational:    Mul(numerator factors..., Pow(D, -1)), D an Add of 1-2
///                 unit-coefficient power products and an optional +-1
///  - Logarithmic: Mul(Log_b(Mul(Pow(Var)...))), b in {10, e}
///  - Constant:    Const
Term sample_template(TemplateKind kind, std::span<const std::string> variables, Rng& rng,
                     const TemplateOptions& options = {});

/// Structural kind of a term body; used for canonical ordering and
/// population statistics.
TemplateKind classify_term(const ExprGraph& body);

/// Number of power-product summands in a rational term's denominator, or
/// nullopt when the body is not rational.
std::optional<std::size_t> denominator_summands(const ExprGraph& body);

}  // namespace corona::expr

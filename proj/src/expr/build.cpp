#include "corona/expr/build.hpp"

#include "corona/error.hpp"

namespace corona::expr {

namespace {

void add_factors(GraphBuilder& b, NodeId mul, const std::vector<Factor>& factors) {
  for (const auto& f : factors) {
    const auto pow = b.add_node(OpKind::Pow);
    b.connect(pow, b.add_var(f.var));
    b.connect(mul, pow, f.exponent);
  }
}

NodeId add_log(GraphBuilder& b, NodeId parent, const LogFactor& log) {
  if (log.argument.empty()) throw Error(ErrorKind::InvalidInput, "log factor needs an argument");
  const auto lg = b.add_node(OpKind::Log);
  const auto inner = b.add_node(OpKind::Mul);
  add_factors(b, inner, log.argument);
  b.connect(lg, inner);
  b.connect(parent, lg, log.base);
  return lg;
}

}  // namespace

Term product_term(double coefficient, const std::vector<Factor>& factors) {
  if (factors.empty()) throw Error(ErrorKind::InvalidInput, "product term needs a factor");
  GraphBuilder b;
  const auto mul = b.add_node(OpKind::Mul);
  add_factors(b, mul, factors);
  return {std::move(b).build(mul), coefficient};
}

Term log_term(double coefficient, const LogFactor& log) {
  GraphBuilder b;
  const auto mul = b.add_node(OpKind::Mul);
  add_log(b, mul, log);
  return {std::move(b).build(mul), coefficient};
}

Term rational_term(double coefficient, const std::vector<Factor>& numerator,
                   const std::vector<Summand>& denominator) {
  if (denominator.empty()) throw Error(ErrorKind::InvalidInput, "rational term needs a denominator");
  GraphBuilder b;
  const auto mul = b.add_node(OpKind::Mul);
  add_factors(b, mul, numerator);
  const auto denom = b.add_node(OpKind::Add);
  for (const auto& s : denominator) {
    if (s.factors.empty() && !s.log) {
      b.connect(denom, b.add_const(), s.sign);
      continue;
    }
    const auto smul = b.add_node(OpKind::Mul);
    add_factors(b, smul, s.factors);
    if (s.log) add_log(b, smul, *s.log);
    b.connect(denom, smul, s.sign);
  }
  const auto recip = b.add_node(OpKind::Pow);
  b.connect(recip, denom);
  b.connect(mul, recip, -1.0);
  return {std::move(b).build(mul), coefficient};
}

Term constant_term(double coefficient) {
  GraphBuilder b;
  const auto c = b.add_const();
  return {std::move(b).build(c), coefficient};
}

}  // namespace corona::expr

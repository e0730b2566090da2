#include "corona/expr/templates.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>

#include "corona/error.hpp"

namespace corona::expr {

std::string_view to_string(TemplateKind kind) noexcept {
  switch (kind) {
    case TemplateKind::Polynomial: return "polynomial";
    case TemplateKind::Rational: return "rational";
    case TemplateKind::Logarithmic: return "logarithmic";
    case TemplateKind::Constant: return "constant";
  }
  return "?";
}

std::vector<int> exponent_alphabet(int lo, int hi) {
  std::vector<int> out;
  for (int p = lo; p <= hi; ++p) {
    if (p != 0) out.push_back(p);
  }
  return out;
}

std::vector<int> default_exponent_alphabet() { return exponent_alphabet(-3, 3); }

namespace {

constexpr double kRationalConstProbability = 0.3;
constexpr double kDenominatorLogProbability = 0.25;

std::vector<std::size_t> choose_distinct(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + uniform_index(rng, n - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double random_base(Rng& rng) { return bernoulli(rng, 0.5) ? 10.0 : std::numbers::e; }

class TermSampler {
 public:
  TermSampler(std::span<const std::string> vars, Rng& rng, const TemplateOptions& opt)
      : vars_(vars), rng_(rng), opt_(opt) {
    for (int p : opt_.exponents) {
      if (p > 0) positive_.push_back(p);
    }
    if (positive_.empty()) positive_ = opt_.exponents;
  }

  Term polynomial() {
    const auto mul = b_.add_node(OpKind::Mul);
    const auto k = 1 + uniform_index(rng_, std::min(opt_.max_factors, vars_.size()));
    add_power_factors(mul, k, opt_.exponents);
    return finish(mul);
  }

  Term rational() {
    const auto mul = b_.add_node(OpKind::Mul);
    const auto numer = uniform_index(rng_, std::min<std::size_t>(2, vars_.size()) + 1);
    add_power_factors(mul, numer, opt_.exponents);

    const auto denom = b_.add_node(OpKind::Add);
    const auto summands = 1 + uniform_index(rng_, 2);
    for (std::size_t s = 0; s < summands; ++s) {
      const auto smul = b_.add_node(OpKind::Mul);
      const auto k = 1 + uniform_index(rng_, std::min<std::size_t>(2, vars_.size()));
      add_power_factors(smul, k, positive_);
      if (opt_.allow_log && bernoulli(rng_, kDenominatorLogProbability)) {
        b_.connect(smul, log_of_var(), random_base(rng_));
      }
      b_.connect(denom, smul, sign());
    }
    if (bernoulli(rng_, kRationalConstProbability)) b_.connect(denom, b_.add_const(), sign());

    const auto recip = b_.add_node(OpKind::Pow);
    b_.connect(recip, denom);
    b_.connect(mul, recip, -1.0);
    return finish(mul);
  }

  Term logarithmic() {
    const auto mul = b_.add_node(OpKind::Mul);
    const auto lg = b_.add_node(OpKind::Log);
    const auto inner = b_.add_node(OpKind::Mul);
    const auto k = 1 + uniform_index(rng_, std::min<std::size_t>(2, vars_.size()));
    add_power_factors(inner, k, opt_.exponents);
    b_.connect(lg, inner);
    b_.connect(mul, lg, random_base(rng_));
    return finish(mul);
  }

  Term constant() { return finish(b_.add_const()); }

 private:
  void add_power_factors(NodeId mul, std::size_t k, std::span<const int> exponents) {
    for (auto v : choose_distinct(rng_, vars_.size(), k)) {
      const auto var = b_.add_var(vars_[v]);
      if (!opt_.allow_pow) {
        b_.connect(mul, var);
        continue;
      }
      const auto pow = b_.add_node(OpKind::Pow);
      b_.connect(pow, var);
      b_.connect(mul, pow, exponents[uniform_index(rng_, exponents.size())]);
    }
  }

  NodeId log_of_var() {
    const auto lg = b_.add_node(OpKind::Log);
    const auto inner = b_.add_node(OpKind::Mul);
    add_power_factors(inner, 1, positive_);
    b_.connect(lg, inner);
    return lg;
  }

  double sign() { return bernoulli(rng_, 0.5) ? 1.0 : -1.0; }

  Term finish(NodeId root) { return {std::move(b_).build(root), 1.0}; }

  std::span<const std::string> vars_;
  Rng& rng_;
  const TemplateOptions& opt_;
  std::vector<int> positive_;
  GraphBuilder b_;
};

}  // namespace

Term sample_template(TemplateKind kind, std::span<const std::string> variables, Rng& rng,
                     const TemplateOptions& options) {
  if (variables.empty() && kind != TemplateKind::Constant) {
    throw Error(ErrorKind::InvalidInput, "template sampling needs at least one variable");
  }
  if (options.exponents.empty()) throw Error(ErrorKind::InvalidInput, "empty exponent alphabet");
  TermSampler s(variables, rng, options);
  switch (kind) {
    case TemplateKind::Polynomial: return s.polynomial();
    case TemplateKind::Rational: return options.allow_pow ? s.rational() : s.polynomial();
    case TemplateKind::Logarithmic: return options.allow_log ? s.logarithmic() : s.polynomial();
    case TemplateKind::Constant: return s.constant();
  }
  return s.constant();
}

TemplateKind classify_term(const ExprGraph& body) {
  const auto& root = body.node(body.root());
  if (root.kind == OpKind::Const) return TemplateKind::Constant;
  if (root.kind != OpKind::Mul) return TemplateKind::Polynomial;
  bool has_log = false;
  for (auto k : body.out_edges(root.id)) {
    const auto& child = body.node(body.edges()[k].to);
    if (child.kind == OpKind::Log) has_log = true;
    if (child.kind == OpKind::Pow) {
      const auto inner = body.out_edges(child.id);
      if (!inner.empty()) {
        const auto ik = body.node(body.edges()[inner.front()].to).kind;
        if (ik == OpKind::Add || ik == OpKind::Mul) return TemplateKind::Rational;
      }
    }
  }
  return has_log ? TemplateKind::Logarithmic : TemplateKind::Polynomial;
}

std::optional<std::size_t> denominator_summands(const ExprGraph& body) {
  if (classify_term(body) != TemplateKind::Rational) return std::nullopt;
  for (auto k : body.out_edges(body.root())) {
    const auto& child = body.node(body.edges()[k].to);
    if (child.kind != OpKind::Pow) continue;
    const auto& d = body.node(body.edges()[body.out_edges(child.id).front()].to);
    if (d.kind == OpKind::Mul) return 1;
    if (d.kind != OpKind::Add) continue;
    std::size_t count = 0;
    for (auto s : body.out_edges(d.id)) {
      if (body.node(body.edges()[s].to).kind != OpKind::Const) ++count;
    }
    return count;
  }
  return std::nullopt;
}

}  // namespace corona::expr

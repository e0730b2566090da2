#include <cmath>
#include <numbers>
#include <set>

#include "doctest.h"

#include "corona/error.hpp"
#include "corona/expr/build.hpp"
#include "corona/expr/eval.hpp"
#include "corona/expr/render.hpp"
#include "corona/expr/templates.hpp"

using namespace corona;
using namespace corona::expr;

namespace {

const double kE = std::numbers::e;

// 0.0878 E n + 72.3 log10 d - 648.7 / (E log10 E)
ExprGraph eq5_graph() {
  return sum_of({product_term(0.0878, {{"E", 1}, {"n", 1}}),
                 log_term(72.3, {{{"d", 1}}, 10.0}),
                 rational_term(-648.7, {}, {{1.0, {{"E", 1}}, LogFactor{{{"E", 1}}, 10.0}}})});
}

// -117.2 n / (n^2 d - d) - 133.5 n / (E + n d^2) + 98.68 - 629.7 / E
ExprGraph eq10_graph() {
  return sum_of({rational_term(-117.2, {{"n", 1}}, {{1.0, {{"n", 2}, {"d", 1}}}, {-1.0, {{"d", 1}}}}),
                 rational_term(-133.5, {{"n", 1}}, {{1.0, {{"E", 1}}}, {1.0, {{"n", 1}, {"d", 2}}}}),
                 constant_term(98.68), product_term(-629.7, {{"E", -1}})});
}

Dataset one_row(double e, double n, double d) {
  return Dataset({"E", "n", "d"}, {{e}, {n}, {d}});
}

std::size_t count_terms(const std::string& text) {
  std::size_t count = 1;
  for (std::size_t pos = text.find(" + "); pos != std::string::npos; pos = text.find(" + ", pos + 3)) {
    ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("evaluate: forced arithmetic and the three-term audible-noise law") {
  const auto g = sum_of({product_term(2.0, {{"x", 2}, {"y", 1}})});
  CHECK(evaluate(g, {{"x", 3.0}, {"y", 4.0}}) == doctest::Approx(72.0).epsilon(1e-15));

  // Straight-line arithmetic oracle, independent of the graph path.
  const double E = 20, n = 8, d = 2.4;
  const double oracle = 0.0878 * E * n + 72.3 * std::log10(d) - 648.7 / (E * std::log10(E));
  const double got = evaluate(eq5_graph(), {{"E", E}, {"n", n}, {"d", d}});
  CHECK(std::abs(got - oracle) <= 1e-12 * std::abs(oracle));
  CHECK(got == doctest::Approx(16.607).epsilon(5e-5));
}

TEST_CASE("evaluate: log domain violation and missing variables") {
  const auto g = sum_of({log_term(3.0, {{{"x", 1}}, 10.0})});
  try {
    evaluate(g, {{"x", 0.0}});
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFinite);
  }
  try {
    evaluate(g, {{"y", 1.0}});
    FAIL("expected UnboundVariable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnboundVariable);
  }
}

TEST_CASE("evaluate: reciprocal guard and 0 to a negative power") {
  const auto g = sum_of({product_term(1.0, {{"x", -2}})});
  CHECK_THROWS_AS(evaluate(g, {{"x", 1e-13}}), Error);
  CHECK(evaluate(g, {{"x", 2.0}}) == doctest::Approx(0.25));
}

TEST_CASE("evaluate_batch") {
  SUBCASE("identity") {
    const auto g = sum_of({product_term(1.0, {{"x", 1}})});
    const auto r = evaluate_batch(g, Dataset({"x"}, {{1, 2, 3}}));
    CHECK(r.values == std::vector<double>{1, 2, 3});
    CHECK(r.nonfinite_count() == 0);
  }
  SUBCASE("division guard flags the row") {
    const auto g = sum_of({product_term(1.0, {{"x", -1}})});
    const auto r = evaluate_batch(g, Dataset({"x"}, {{0, 1}}));
    CHECK_FALSE(r.finite[0]);
    CHECK(std::isnan(r.values[0]));
    CHECK(r.finite[1]);
    CHECK(r.values[1] == 1.0);
  }
  SUBCASE("four-term radio-interference law") {
    const double E = 20, n = 8, d = 2.4;
    const double oracle = -117.2 * n / (n * n * d - d) - 133.5 * n / (E + n * d * d) + 98.68 - 629.7 / E;
    const auto r = evaluate_batch(eq10_graph(), one_row(E, n, d));
    REQUIRE(r.finite[0]);
    CHECK(std::abs(r.values[0] - oracle) <= 1e-12 * std::abs(oracle));
    CHECK(r.values[0] == doctest::Approx(44.832).epsilon(2e-5));
  }
  SUBCASE("missing column") {
    const auto g = sum_of({product_term(1.0, {{"z", 1}})});
    CHECK_THROWS_AS(evaluate_batch(g, Dataset({"x"}, {{1, 2}})), Error);
  }
}

TEST_CASE("term_values") {
  SUBCASE("x and log10 x") {
    const auto g = sum_of({product_term(5.0, {{"x", 1}}), log_term(-2.0, {{{"x", 1}}, 10.0})});
    const auto m = term_values(g, Dataset({"x"}, {{10.0}}));
    CHECK(m.terms == 2);
    CHECK(m.at(0, 0) == doctest::Approx(10.0));
    CHECK(m.at(0, 1) == doctest::Approx(1.0));
  }
  SUBCASE("constant column") {
    const auto g = sum_of({constant_term(7.5)});
    const auto m = term_values(g, Dataset({"x"}, {{3.0, -4.0}}));
    CHECK(m.at(0, 0) == 1.0);
    CHECK(m.at(1, 0) == 1.0);
  }
  SUBCASE("E n and 1/(E log10 E)") {
    const auto g = sum_of({product_term(3.0, {{"E", 1}, {"n", 1}}),
                           rational_term(4.0, {}, {{1.0, {{"E", 1}}, LogFactor{{{"E", 1}}, 10.0}}})});
    const auto m = term_values(g, Dataset({"E", "n"}, {{10.0}, {2.0}}));
    CHECK(m.at(0, 0) == doctest::Approx(20.0));
    CHECK(m.at(0, 1) == doctest::Approx(0.1));
  }
}

TEST_CASE("linearity of the root: evaluate equals coefficient-weighted terms") {
  Rng rng(7);
  const std::vector<std::string> vars{"E", "n", "d"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Term> terms;
    const auto k = 1 + uniform_index(rng, 5);
    for (std::size_t j = 0; j < k; ++j) {
      auto t = sample_template(kAllTemplateKinds[uniform_index(rng, 4)], vars, rng);
      t.coefficient = uniform01(rng) * 10.0 - 5.0;
      terms.push_back(std::move(t));
    }
    const auto g = sum_of(terms);
    const Assignment a{{"E", 5 + 20 * uniform01(rng)}, {"n", 2 + 10 * uniform01(rng)},
                       {"d", 1 + 3 * uniform01(rng)}};
    Dataset row({"E", "n", "d"}, {{a.at("E")}, {a.at("n")}, {a.at("d")}});
    const auto m = term_values(g, row);
    if (!m.row_finite[0]) continue;
    double sum = 0.0;
    const auto c = g.coefficients();
    for (std::size_t j = 0; j < m.terms; ++j) sum += c[j] * m.at(0, j);
    const double direct = evaluate(g, a);
    CHECK(direct == sum);
    // Pure function: repeated evaluation is bit-identical.
    CHECK(evaluate(g, a) == direct);
  }
}

TEST_CASE("render") {
  SUBCASE("formatting contract") {
    CHECK(render(sum_of({product_term(2.0, {{"x", 2}})})) == "2.00000*x^2");
  }
  SUBCASE("deterministic and independent of term order") {
    const auto a = sum_of({product_term(1.022, {{"n", 1}}), product_term(10.4, {{"d", 1}}),
                           constant_term(30.839), product_term(-933.633, {{"E", -1}})});
    const auto b = sum_of({product_term(-933.633, {{"E", -1}}), constant_term(30.839),
                           product_term(10.4, {{"d", 1}}), product_term(1.022, {{"n", 1}})});
    CHECK(render(a) == render(a));
    CHECK(render(a) == render(b));
    CHECK(count_terms(render(a)) == 4);
  }
  SUBCASE("structurally different graphs differ") {
    const auto a = sum_of({product_term(1.0, {{"x", 2}})});
    const auto b = sum_of({product_term(1.0, {{"x", 3}})});
    const auto c = sum_of({log_term(1.0, {{{"x", 2}}, kE})});
    CHECK(render(a) != render(b));
    CHECK(render(a) != render(c));
  }
  SUBCASE("discovered law text") {
    CHECK(render(eq5_graph()) ==
          "0.0878000*E*n + -648.700*(E*log10(E))^-1 + 72.3000*log10(d)");
  }
}

TEST_CASE("sample_template structure") {
  Rng rng(2024);
  const std::vector<std::string> vars{"E", "n", "d"};
  const TemplateOptions opt;
  const std::set<int> alphabet(opt.exponents.begin(), opt.exponents.end());

  auto check_exponents = [&](const ExprGraph& body) {
    for (const auto& e : body.edges()) {
      if (body.node(e.to).kind != OpKind::Pow) continue;
      const auto& inner = body.node(body.edges()[body.out_edges(e.to).front()].to);
      if (inner.kind == OpKind::Var) CHECK(alphabet.count(static_cast<int>(e.feature)) == 1);
    }
  };

  for (int i = 0; i < 200; ++i) {
    const auto t = sample_template(TemplateKind::Polynomial, vars, rng, opt);
    const auto& root = t.body.node(t.body.root());
    CHECK(root.kind == OpKind::Mul);
    const auto outs = t.body.out_edges(root.id);
    CHECK(outs.size() >= 1);
    CHECK(outs.size() <= 3);
    for (auto k : outs) {
      const auto& pow = t.body.node(t.body.edges()[k].to);
      CHECK(pow.kind == OpKind::Pow);
      CHECK(t.body.node(t.body.edges()[t.body.out_edges(pow.id).front()].to).kind == OpKind::Var);
    }
    check_exponents(t.body);
    CHECK(classify_term(t.body) == TemplateKind::Polynomial);
    CHECK(is_valid(sum_of({t}), 5));
  }

  for (int i = 0; i < 200; ++i) {
    const auto t = sample_template(TemplateKind::Logarithmic, vars, rng, opt);
    std::size_t logs = 0;
    for (const auto& e : t.body.edges()) {
      if (t.body.node(e.to).kind == OpKind::Log) {
        ++logs;
        CHECK((e.feature == 10.0 || e.feature == kE));
      }
    }
    CHECK(logs == 1);
    check_exponents(t.body);
    CHECK(classify_term(t.body) == TemplateKind::Logarithmic);
    CHECK(is_valid(sum_of({t}), 5));
  }

  for (int i = 0; i < 1000; ++i) {
    const auto t = sample_template(TemplateKind::Rational, vars, rng, opt);
    const auto summands = denominator_summands(t.body);
    REQUIRE(summands.has_value());
    CHECK(*summands >= 1);
    CHECK(*summands <= 2);
    check_exponents(t.body);
    CHECK(is_valid(sum_of({t}), 5));
  }

  const auto c = sample_template(TemplateKind::Constant, vars, rng, opt);
  CHECK(c.body.node(c.body.root()).kind == OpKind::Const);
  CHECK(classify_term(c.body) == TemplateKind::Constant);
}

TEST_CASE("validate") {
  SUBCASE("self loop") {
    const ExprGraph g({{0, OpKind::Add, {}}, {1, OpKind::Mul, {}}},
                      {{0, 1, 1.0}, {1, 1, 1.0}}, 0);
    const auto v = validate(g, 5);
    CHECK(std::any_of(v.begin(), v.end(), [](const Violation& x) { return x.kind == ViolationKind::Cycle; }));
  }
  SUBCASE("root must be Add") {
    const ExprGraph g({{0, OpKind::Mul, {}}, {1, OpKind::Var, "x"}}, {{0, 1, 1.0}}, 0);
    const auto v = validate(g, 5);
    CHECK(std::any_of(v.begin(), v.end(), [](const Violation& x) { return x.kind == ViolationKind::RootKind; }));
  }
  SUBCASE("term count") {
    std::vector<Term> terms(6, product_term(1.0, {{"x", 1}}));
    const auto v = validate(sum_of(terms), 5);
    CHECK(std::any_of(v.begin(), v.end(), [](const Violation& x) { return x.kind == ViolationKind::TermCount; }));
    CHECK(is_valid(sum_of(terms), 6));
  }
  SUBCASE("arity, unreachable and bad features") {
    const ExprGraph g({{0, OpKind::Add, {}}, {1, OpKind::Mul, {}}, {2, OpKind::Pow, {}},
                       {3, OpKind::Var, "x"}, {4, OpKind::Var, "y"}, {5, OpKind::Const, {}}},
                      {{0, 1, 1.0}, {1, 2, 0.0}, {2, 3, 1.0}, {2, 4, 1.0}}, 0);
    const auto v = validate(g, 5);
    auto has = [&](ViolationKind k) {
      return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.kind == k; });
    };
    CHECK(has(ViolationKind::Arity));
    CHECK(has(ViolationKind::Unreachable));
    CHECK(has(ViolationKind::MissingFeature));
  }
  SUBCASE("log base outside {10, e}") {
    const auto g = sum_of({log_term(1.0, {{{"x", 1}}, 2.0})});
    const auto v = validate(g, 5);
    CHECK(std::any_of(v.begin(), v.end(), [](const Violation& x) { return x.kind == ViolationKind::InvalidBase; }));
  }
  SUBCASE("published laws are valid") {
    CHECK(is_valid(eq5_graph(), 3));
    CHECK(is_valid(eq10_graph(), 4));
    CHECK_FALSE(is_valid(eq10_graph(), 3));
  }
}

TEST_CASE("graph JSON round trip on canonical graphs") {
  Rng rng(99);
  const std::vector<std::string> vars{"E", "n", "d"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Term> terms;
    const auto k = 1 + uniform_index(rng, 5);
    for (std::size_t j = 0; j < k; ++j) {
      auto t = sample_template(kAllTemplateKinds[uniform_index(rng, 4)], vars, rng);
      t.coefficient = uniform01(rng) * 2e3 - 1e3;
      terms.push_back(std::move(t));
    }
    const auto g = sum_of(terms);
    const auto text = to_json(g).dump();
    const auto back = graph_from_json(nlohmann::json::parse(text));
    CHECK(back == g);
    CHECK(canonicalize(back) == g);
  }
  CHECK_THROWS_AS(graph_from_json(nlohmann::json::parse(R"({"nodes":[],"edges":[]})")), Error);
  CHECK_THROWS_AS(graph_from_json(nlohmann::json::parse(
                      R"({"nodes":[{"id":0,"kind":"sin"}],"edges":[],"root":0})")),
                  Error);
}

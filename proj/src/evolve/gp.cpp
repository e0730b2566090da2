#include "corona/evolve/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#if defined(CORONA_HAVE_OPENMP)
#include <omp.h>
#endif

#include "corona/error.hpp"
#include "corona/expr/render.hpp"

namespace corona::evolve {

using expr::ExprGraph;
using expr::OpKind;
using expr::Term;

namespace {

// Slot offsets keep the per-generation streams of different roles apart.
constexpr std::uint64_t kOffspringSlots = 0;
constexpr std::uint64_t kFreshSlots = 1ULL << 32;

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

expr::TemplateKind pick_kind(const GPConfig& config, Rng& rng) {
  return expr::kAllTemplateKinds[pick_weighted(rng, config.template_weights)];
}

Term fresh_term(std::span<const std::string> variables, const GPConfig& config, Rng& rng) {
  return expr::sample_template(pick_kind(config, rng), variables, rng, config.templates);
}

}  // namespace

void GPConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidInput, what); };
  if (population_size < 2 || population_size % 2 != 0) fail("population_size must be even and at least 2");
  if (max_terms < 1) fail("max_terms must be at least 1");
  const std::array<double, 3> r{rates.edge_feature, rates.subgraph_replace, rates.add_remove};
  for (double v : r) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail("mutation rates must be non-negative");
  }
  if (std::abs(sum(r) - 1.0) > 1e-9) fail("mutation rates must sum to 1");
  if (!(lambda_mono > 0.0) || !std::isfinite(lambda_mono)) fail("lambda_mono must be positive");
  for (double p : {crossover_probability, mutation_probability}) {
    if (!(p >= 0.0 && p <= 1.0)) fail("probabilities must lie in [0, 1]");
  }
  if (crossover_terms < 1) fail("crossover_terms must be at least 1");
  for (double w : template_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) fail("template weights must be non-negative");
  }
  if (!(sum(template_weights) > 0.0)) fail("at least one template weight must be positive");
  if (templates.exponents.empty()) fail("exponent alphabet must not be empty");
  for (int e : templates.exponents) {
    if (e == 0) fail("exponent alphabet must not contain 0");
  }
  if (templates.max_factors < 1) fail("max_factors must be at least 1");
}

nlohmann::json to_json(const GPConfig& c) {
  return {
      {"population_size", c.population_size},
      {"generations", c.generations},
      {"max_terms", c.max_terms},
      {"lambda_mono", c.lambda_mono},
      {"mutation_rates",
       {{"edge_feature", c.rates.edge_feature},
        {"subgraph_replace", c.rates.subgraph_replace},
        {"add_remove", c.rates.add_remove}}},
      {"crossover_probability", c.crossover_probability},
      {"mutation_probability", c.mutation_probability},
      {"crossover_terms", c.crossover_terms},
      {"template_weights",
       {{"polynomial", c.template_weights[0]},
        {"rational", c.template_weights[1]},
        {"logarithmic", c.template_weights[2]},
        {"constant", c.template_weights[3]}}},
      {"exponents", c.templates.exponents},
      {"allow_log", c.templates.allow_log},
      {"allow_pow", c.templates.allow_pow},
      {"max_factors", c.templates.max_factors},
      {"seed", c.seed},
      {"dedup", c.dedup},
      {"report_size", c.report_size},
  };
}

ExprGraph random_graph(std::span<const std::string> variables, const GPConfig& config, Rng& rng) {
  const auto count = 1 + uniform_index(rng, config.max_terms);
  std::vector<Term> terms;
  terms.reserve(count);
  for (std::size_t i = 0; i < count; ++i) terms.push_back(fresh_term(variables, config, rng));
  return expr::join_terms(terms);
}

std::vector<Individual> init_population(const GPConfig& config,
                                        std::span<const std::string> variables, Rng& rng) {
  config.validate();
  std::vector<Individual> out;
  out.reserve(config.population_size);
  for (std::size_t i = 0; i < config.population_size; ++i) {
    out.push_back({random_graph(variables, config, rng), std::nullopt});
  }
  return out;
}

std::pair<ExprGraph, ExprGraph> crossover(const ExprGraph& a, const ExprGraph& b,
                                          std::size_t terms_swapped, Rng& rng) {
  auto ta = expr::split_terms(a);
  auto tb = expr::split_terms(b);
  const auto k = std::min({terms_swapped, ta.size(), tb.size()});
  // Distinct positions in each parent, drawn by partial Fisher-Yates.
  auto draw = [&](std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + uniform_index(rng, n - i)]);
    idx.resize(k);
    return idx;
  };
  const auto ia = draw(ta.size());
  const auto ib = draw(tb.size());
  for (std::size_t i = 0; i < k; ++i) std::swap(ta[ia[i]], tb[ib[i]]);
  return {expr::join_terms(ta), expr::join_terms(tb)};
}

namespace {

bool mutable_edge(const ExprGraph& g, const expr::Edge& e) {
  const auto kind = g.node(e.to).kind;
  if (kind == OpKind::Log) return true;
  if (kind != OpKind::Pow) return false;
  // Only exponents on variables; the reciprocal of a rational denominator
  // is part of the template shape.
  const auto child = g.edges()[g.out_edges(e.to).front()].to;
  return g.node(child).kind == OpKind::Var;
}

std::optional<ExprGraph> mutate_edge_feature(const ExprGraph& g, const GPConfig& config, Rng& rng) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    if (mutable_edge(g, g.edges()[i])) candidates.push_back(i);
  }
  if (candidates.empty()) return std::nullopt;
  auto edges = g.edges();
  auto& e = edges[candidates[uniform_index(rng, candidates.size())]];
  if (g.node(e.to).kind == OpKind::Log) {
    e.feature = e.feature == 10.0 ? std::numbers::e : 10.0;
  } else {
    std::vector<int> choices;
    for (int x : config.templates.exponents) {
      if (static_cast<double>(x) != e.feature) choices.push_back(x);
    }
    if (choices.empty()) return std::nullopt;
    e.feature = choices[uniform_index(rng, choices.size())];
  }
  return ExprGraph(g.nodes(), std::move(edges), g.root());
}

ExprGraph replace_term(const ExprGraph& g, std::span<const std::string> variables,
                       const GPConfig& config, Rng& rng) {
  auto terms = expr::split_terms(g);
  const auto i = uniform_index(rng, terms.size());
  terms[i] = fresh_term(variables, config, rng);
  return expr::join_terms(terms);
}

std::optional<ExprGraph> add_or_remove(const ExprGraph& g, std::span<const std::string> variables,
                                       const GPConfig& config, Rng& rng) {
  auto terms = expr::split_terms(g);
  const bool can_add = terms.size() < config.max_terms;
  const bool can_remove = terms.size() > 1;
  if (!can_add && !can_remove) return std::nullopt;
  bool add = bernoulli(rng, 0.5);
  if (add && !can_add) add = false;
  if (!add && !can_remove) add = true;
  if (add) {
    terms.push_back(fresh_term(variables, config, rng));
  } else {
    terms.erase(terms.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, terms.size())));
  }
  return expr::join_terms(terms);
}

}  // namespace

ExprGraph mutate(const ExprGraph& graph, MutationKind kind, std::span<const std::string> variables,
                 const GPConfig& config, Rng& rng) {
  std::optional<ExprGraph> out;
  switch (kind) {
    case MutationKind::EdgeFeature: out = mutate_edge_feature(graph, config, rng); break;
    case MutationKind::AddRemove: out = add_or_remove(graph, variables, config, rng); break;
    case MutationKind::SubgraphReplace: break;
  }
  if (!out) out = replace_term(graph, variables, config, rng);
  return *std::move(out);
}

ExprGraph mutate(const ExprGraph& graph, std::span<const std::string> variables,
                 const GPConfig& config, Rng& rng) {
  const std::array<double, 3> w{config.rates.edge_feature, config.rates.subgraph_replace,
                                config.rates.add_remove};
  const auto kind = static_cast<MutationKind>(pick_weighted(rng, w));
  return mutate(graph, kind, variables, config, rng);
}

std::vector<std::size_t> rank(std::span<const Individual> individuals) {
  std::vector<std::size_t> order(individuals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double la = individuals[a].total();
    const double lb = individuals[b].total();
    if (la != lb) return la < lb;
    return individuals[a].graph.node_count() < individuals[b].graph.node_count();
  });
  return order;
}

std::vector<Individual> select(std::span<const Individual> scored, const GPConfig& config,
                               std::span<const std::string> variables, Rng& rng) {
  const auto order = rank(scored);
  const auto keep = std::min(config.population_size / 2, scored.size());
  std::vector<Individual> out;
  out.reserve(config.population_size);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(scored[order[i]]);
  while (out.size() < config.population_size) {
    out.push_back({random_graph(variables, config, rng), std::nullopt});
  }
  return out;
}

void score_serial(const fit::Objective& objective, std::span<Individual> individuals) {
  for (auto& ind : individuals) {
    if (ind.scored()) continue;
    auto s = objective.score(ind.graph);
    ind.graph = std::move(s.graph);
    ind.loss = s.loss;
  }
}

void score_parallel(const fit::Objective& objective, std::span<Individual> individuals,
                    [[maybe_unused]] int threads) {
#if defined(CORONA_HAVE_OPENMP)
  const auto n = static_cast<std::ptrdiff_t>(individuals.size());
  const int workers = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(workers)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto& ind = individuals[static_cast<std::size_t>(i)];
    if (ind.scored()) continue;
    auto s = objective.score(ind.graph);
    ind.graph = std::move(s.graph);
    ind.loss = s.loss;
  }
#else
  score_serial(objective, individuals);
#endif
}

namespace {

void score(const fit::Objective& objective, std::span<Individual> individuals,
           const RunOptions& options) {
  if (options.execution == Execution::Parallel) {
    score_parallel(objective, individuals, options.threads);
  } else {
    score_serial(objective, individuals);
  }
}

void apply_dedup(std::vector<Individual>& pool) {
  std::unordered_set<std::string> seen;
  for (auto& ind : pool) {
    if (!ind.loss || !ind.loss->finite()) continue;
    if (!seen.insert(expr::render(ind.graph)).second) ind.loss = fit::LossBreakdown::rejected();
  }
}

// pop must already be ranked.
std::array<double, 5> top5(std::span<const Individual> pop) {
  std::array<double, 5> out;
  out.fill(fit::kInfiniteLoss);
  for (std::size_t i = 0; i < out.size() && i < pop.size(); ++i) out[i] = pop[i].total();
  return out;
}

std::vector<Individual> sorted_by_rank(std::vector<Individual> pop) {
  const auto order = rank(pop);
  std::vector<Individual> out;
  out.reserve(pop.size());
  for (auto i : order) out.push_back(std::move(pop[i]));
  return out;
}

std::vector<Individual> fresh_individuals(std::size_t count, std::span<const std::string> variables,
                                          const GPConfig& config, std::uint64_t generation) {
  std::vector<Individual> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto rng = derive_stream(config.seed, generation, kFreshSlots + i);
    out.push_back({random_graph(variables, config, rng), std::nullopt});
  }
  return out;
}

std::vector<Individual> make_offspring(std::span<const Individual> parents,
                                       std::span<const std::string> variables,
                                       const GPConfig& config, std::uint64_t generation) {
  std::vector<Individual> out;
  if (parents.empty()) return out;
  const auto wanted = parents.size();
  out.reserve(wanted);
  for (std::uint64_t pair = 0; out.size() < wanted; ++pair) {
    auto rng = derive_stream(config.seed, generation, kOffspringSlots + pair);
    const auto& a = parents[uniform_index(rng, parents.size())].graph;
    const auto& b = parents[uniform_index(rng, parents.size())].graph;
    auto children = bernoulli(rng, config.crossover_probability)
                        ? crossover(a, b, config.crossover_terms, rng)
                        : std::pair{a, b};
    for (auto* child : {&children.first, &children.second}) {
      if (out.size() == wanted) break;
      if (bernoulli(rng, config.mutation_probability)) *child = mutate(*child, variables, config, rng);
      out.push_back({std::move(*child), std::nullopt});
    }
  }
  return out;
}

}  // namespace

RunReport run_discovery(const Dataset& data, const std::vector<fit::MonotonicitySpec>& specs,
                        const GPConfig& config, const RunOptions& options) {
  config.validate();
  if (data.rows() < 2) throw Error(ErrorKind::EmptyDataset, "discovery needs at least two rows");
  const fit::Objective objective(data, specs, config.lambda_mono);
  const auto& variables = data.variable_names();

  RunReport report;
  report.config = config;
  report.variables = variables;
  report.seed = config.seed;

  auto pop = fresh_individuals(config.population_size, variables, config, 0);
  score(objective, pop, options);
  pop = sorted_by_rank(std::move(pop));
  report.trace.push_back(top5(pop));

  const auto half = config.population_size / 2;
  for (std::uint64_t gen = 1; gen <= config.generations; ++gen) {
    // pop is sorted, so its first half are the parents.
    auto offspring = make_offspring(std::span(pop).first(half), variables, config, gen);
    score(objective, offspring, options);

    std::vector<Individual> pool = std::move(pop);
    pool.insert(pool.end(), std::make_move_iterator(offspring.begin()),
                std::make_move_iterator(offspring.end()));
    if (config.dedup) apply_dedup(pool);
    const auto order = rank(pool);

    pop.clear();
    pop.reserve(config.population_size);
    for (std::size_t i = 0; i < half; ++i) pop.push_back(std::move(pool[order[i]]));
    auto fresh = fresh_individuals(config.population_size - half, variables, config, gen);
    score(objective, fresh, options);
    pop.insert(pop.end(), std::make_move_iterator(fresh.begin()),
               std::make_move_iterator(fresh.end()));

    // Re-rank so the next generation's parents sit at the front; survivors
    // keep their relative order and fresh individuals slot in by loss.
    pop = sorted_by_rank(std::move(pop));
    report.trace.push_back(top5(pop));
  }

  std::set<std::string> seen;
  for (const auto& ind : pop) {
    if (report.equations.size() >= config.report_size) break;
    auto text = expr::render(ind.graph);
    if (!seen.insert(text).second) continue;
    report.equations.push_back({ind.graph, std::move(text), ind.loss.value_or(fit::LossBreakdown::rejected())});
  }
  return report;
}

namespace {

nlohmann::json loss_json(const fit::LossBreakdown& l) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  return {{"l_acc", num(l.l_acc)}, {"l_mono", num(l.l_mono)}, {"total", num(l.total)}, {"r2", num(l.r2)}};
}

}  // namespace

nlohmann::json to_json(const RunReport& report) {
  nlohmann::json eqs = nlohmann::json::array();
  for (std::size_t i = 0; i < report.equations.size(); ++i) {
    const auto& e = report.equations[i];
    eqs.push_back({{"rank", i + 1},
                   {"equation", e.text},
                   {"terms", e.graph.term_count()},
                   {"coefficients", e.graph.coefficients()},
                   {"loss", loss_json(e.loss)},
                   {"graph", expr::to_json(e.graph)}});
  }
  nlohmann::json trace = nlohmann::json::array();
  for (std::size_t g = 0; g < report.trace.size(); ++g) {
    nlohmann::json row = nlohmann::json::array();
    for (double v : report.trace[g]) row.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
    trace.push_back({{"generation", g}, {"top5", row}});
  }
  return {{"seed", report.seed},
          {"variables", report.variables},
          {"config", to_json(report.config)},
          {"equations", eqs},
          {"trace", trace}};
}

std::string leaderboard(const RunReport& report) {
  std::ostringstream os;
  char buf[96];
  os << "rank  total        R^2        L_mono       equation\n";
  for (std::size_t i = 0; i < report.equations.size(); ++i) {
    const auto& e = report.equations[i];
    std::snprintf(buf, sizeof buf, "%-5zu %-12.6g %-10.6f %-12.4g ", i + 1, e.loss.total, e.loss.r2,
                  e.loss.l_mono);
    os << buf << e.text << '\n';
  }
  return os.str();
}

std::string trace_csv(const RunReport& report) {
  std::ostringstream os;
  os << "generation,rank1,rank2,rank3,rank4,rank5\n";
  char buf[32];
  for (std::size_t g = 0; g < report.trace.size(); ++g) {
    os << g;
    for (double v : report.trace[g]) {
      if (std::isfinite(v)) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << ',' << buf;
      } else {
        os << ",inf";
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace corona::evolve

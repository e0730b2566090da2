#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "corona/dataset.hpp"
#include "corona/expr/graph.hpp"
#include "corona/expr/templates.hpp"
#include "corona/fit/objective.hpp"
#include "corona/random.hpp"

namespace corona::evolve {

struct MutationRates {
  double edge_feature = 0.4;
  double subgraph_replace = 0.3;
  double add_remove = 0.3;
};

struct GPConfig {
  std::size_t population_size = 500;
  std::size_t generations = 200;
  std::size_t max_terms = 5;
  double lambda_mono = 0.01;
  MutationRates rates;
  double crossover_probability = 0.7;
  double mutation_probability = 0.7;
  std::size_t crossover_terms = 1;  // terms exchanged per crossover
  // Polynomial, Rational, Logarithmic, Constant
  std::array<double, 4> template_weights = {0.3, 0.3, 0.3, 0.1};
  expr::TemplateOptions templates;
  std::uint64_t seed = 0;
  bool dedup = false;
  std::size_t report_size = 10;

  /// Throws Error(InvalidInput) when an invariant is broken.
  void validate() const;
};

nlohmann::json to_json(const GPConfig& config);

struct Individual {
  expr::ExprGraph graph;
  std::optional<fit::LossBreakdown> loss;  // unset until scored

  bool scored() const noexcept { return loss.has_value(); }
  double total() const noexcept { return loss ? loss->total : fit::kInfiniteLoss; }
};

// Variation operators. Each takes its own stream so callers can fix all
// randomness before parallel work begins.

expr::ExprGraph random_graph(std::span<const std::string> variables, const GPConfig& config,
                             Rng& rng);

std::vector<Individual> init_population(const GPConfig& config,
                                        std::span<const std::string> variables, Rng& rng);

std::pair<expr::ExprGraph, expr::ExprGraph> crossover(const expr::ExprGraph& a,
                                                      const expr::ExprGraph& b,
                                                      std::size_t terms_swapped, Rng& rng);

enum class MutationKind { EdgeFeature, SubgraphReplace, AddRemove };

expr::ExprGraph mutate(const expr::ExprGraph& graph, std::span<const std::string> variables,
                       const GPConfig& config, Rng& rng);
/// Applies the named kind; falls back when it has nothing to act on.
expr::ExprGraph mutate(const expr::ExprGraph& graph, MutationKind kind,
                       std::span<const std::string> variables, const GPConfig& config, Rng& rng);

/// Ascending by total loss, then node count, then position. Returns the
/// permutation; the input is not reordered.
std::vector<std::size_t> rank(std::span<const Individual> individuals);

/// Keeps the best population_size / 2 and refills with unscored random
/// individuals. All inputs must be scored.
std::vector<Individual> select(std::span<const Individual> scored, const GPConfig& config,
                               std::span<const std::string> variables, Rng& rng);

// Scoring kernels. Both fill in every unscored individual and produce
// identical results; the parallel one splits individuals across OpenMP
// threads.

void score_serial(const fit::Objective& objective, std::span<Individual> individuals);
void score_parallel(const fit::Objective& objective, std::span<Individual> individuals,
                    int threads = 0);

enum class Execution { Serial, Parallel };

struct RunOptions {
  Execution execution = Execution::Parallel;
  int threads = 0;  // 0: OpenMP default
};

struct RankedEquation {
  expr::ExprGraph graph;
  std::string text;
  fit::LossBreakdown loss;
};

struct RunReport {
  std::vector<RankedEquation> equations;         // best first, unique renders
  std::vector<std::array<double, 5>> trace;      // per generation, top-5 totals
  GPConfig config;
  std::vector<std::string> variables;
  std::uint64_t seed = 0;
};

/// Throws Error(EmptyDataset) for fewer than two rows and propagates
/// Degenerate targets. Deterministic for a given seed in either execution
/// mode and for any thread count.
RunReport run_discovery(const Dataset& data, const std::vector<fit::MonotonicitySpec>& specs,
                        const GPConfig& config, const RunOptions& options = {});

nlohmann::json to_json(const RunReport& report);
std::string leaderboard(const RunReport& report);
/// generation,rank1,...,rank5
std::string trace_csv(const RunReport& report);

}  // namespace corona::evolve

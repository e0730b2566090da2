#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corona/dataset.hpp"
#include "corona/expr/graph.hpp"

namespace corona::expr {

/// Magnitude below which a negative power is treated as a singular reciprocal.
inline constexpr double kReciprocalGuard = 1e-12;

using Assignment = std::map<std::string, double, std::less<>>;

/// Named input column for batch evaluation.
struct ColumnBinding {
  std::string_view name;
  std::span<const double> values;
};

/// Throws Error(UnboundVariable) for a missing variable and Error(NonFinite)
/// when any intermediate leaves the real domain (log of x <= 0, singular
/// reciprocal, overflow).
double evaluate(const ExprGraph& graph, const Assignment& assignment);

struct BatchResult {
  std::vector<double> values;  // NaN where the row is non-finite
  std::vector<bool> finite;
  std::size_t nonfinite_count() const;
};

BatchResult evaluate_batch(const ExprGraph& graph, const Dataset& data);

/// Design matrix: one column per root-level term with its coefficient
/// forced to 1. Row-major storage.
struct TermMatrix {
  std::size_t rows = 0;
  std::size_t terms = 0;
  std::vector<double> values;
  std::vector<bool> row_finite;

  double at(std::size_t r, std::size_t j) const { return values[r * terms + j]; }
  bool all_finite() const;
};

TermMatrix term_values(const ExprGraph& graph, const Dataset& data);
TermMatrix term_values(const ExprGraph& graph, std::span<const ColumnBinding> columns,
                       std::size_t rows);

/// Flattened evaluation plan over a valid graph: nodes in dependency order
/// so a batch is evaluated node-by-node over contiguous row buffers.
class CompiledGraph {
 public:
  explicit CompiledGraph(const ExprGraph& graph);

  /// Binds Var nodes to the given columns; throws UnboundVariable.
  TermMatrix run(std::span<const ColumnBinding> columns, std::size_t rows) const;

  std::size_t term_count() const noexcept { return term_inputs_.size(); }
  const std::vector<std::string>& variables() const noexcept { return variables_; }

 private:
  struct Input {
    std::size_t slot;
    double feature;
    OpKind child_kind;
  };
  struct Step {
    OpKind kind;
    std::size_t var_index;  // for Var
    std::vector<Input> inputs;
  };

  std::vector<Step> steps_;  // slot i computes node in topological position i
  std::vector<Input> term_inputs_;
  std::vector<std::string> variables_;
};

}  // namespace corona::expr

#include "corona/expr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "corona/error.hpp"

namespace corona::expr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline double guarded_pow(double v, double p) {
  if (p < 0.0 && std::abs(v) < kReciprocalGuard) return kNaN;
  if (p == 1.0) return v;
  if (p == 2.0) return v * v;
  if (p == 3.0) return v * v * v;
  if (p == -1.0) return 1.0 / v;
  if (p == -2.0) return 1.0 / (v * v);
  if (p == -3.0) return 1.0 / (v * v * v);
  return std::pow(v, p);
}

inline double guarded_log(double v, double base) {
  if (!(v > 0.0)) return kNaN;
  if (base == 10.0) return std::log10(v);
  if (base == std::numbers::e) return std::log(v);
  return std::log(v) / std::log(base);
}

}  // namespace

std::size_t BatchResult::nonfinite_count() const {
  return static_cast<std::size_t>(std::count(finite.begin(), finite.end(), false));
}

bool TermMatrix::all_finite() const {
  return std::all_of(row_finite.begin(), row_finite.end(), [](bool b) { return b; });
}

CompiledGraph::CompiledGraph(const ExprGraph& graph) {
  const auto root_idx = graph.index_of(graph.root());
  if (!root_idx || graph.nodes()[*root_idx].kind != OpKind::Add) {
    throw Error(ErrorKind::InvalidInput, "graph root must be an Add node");
  }
  const auto& nodes = graph.nodes();
  constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> slot_of(nodes.size(), kUnset);
  std::vector<std::uint8_t> on_stack(nodes.size(), 0);

  // Post-order DFS from each root child; the root itself is folded into
  // term_inputs_.
  auto visit = [&](auto&& self, std::size_t idx) -> std::size_t {
    if (slot_of[idx] != kUnset) return slot_of[idx];
    if (on_stack[idx]) throw Error(ErrorKind::InvalidInput, "graph contains a cycle");
    on_stack[idx] = 1;
    const auto& n = nodes[idx];
    Step step{n.kind, 0, {}};
    for (auto k : graph.out_edges(n.id)) {
      const auto& e = graph.edges()[k];
      const auto child = graph.index_of(e.to);
      if (!child) throw Error(ErrorKind::InvalidInput, "edge to unknown node");
      const auto child_slot = self(self, *child);
      step.inputs.push_back({child_slot, e.feature, nodes[*child].kind});
    }
    if (n.kind == OpKind::Var) {
      auto it = std::find(variables_.begin(), variables_.end(), n.name);
      step.var_index = static_cast<std::size_t>(it - variables_.begin());
      if (it == variables_.end()) variables_.push_back(n.name);
    }
    on_stack[idx] = 0;
    steps_.push_back(std::move(step));
    slot_of[idx] = steps_.size() - 1;
    return slot_of[idx];
  };

  on_stack[*root_idx] = 1;
  for (auto k : graph.out_edges(graph.root())) {
    const auto& e = graph.edges()[k];
    const auto child = graph.index_of(e.to);
    if (!child) throw Error(ErrorKind::InvalidInput, "edge to unknown node");
    const auto slot = visit(visit, *child);
    term_inputs_.push_back({slot, e.feature, nodes[*child].kind});
  }
}

TermMatrix CompiledGraph::run(std::span<const ColumnBinding> columns, std::size_t rows) const {
  std::vector<std::span<const double>> bound(variables_.size());
  for (std::size_t v = 0; v < variables_.size(); ++v) {
    const auto it = std::find_if(columns.begin(), columns.end(),
                                 [&](const ColumnBinding& c) { return c.name == variables_[v]; });
    if (it == columns.end()) {
      throw Error(ErrorKind::UnboundVariable, "variable '" + variables_[v] + "' is not bound");
    }
    if (it->values.size() < rows) {
      throw Error(ErrorKind::InvalidInput, "column '" + variables_[v] + "' is too short");
    }
    bound[v] = it->values;
  }

  std::vector<double> buf(steps_.size() * rows);
  for (std::size_t s = 0; s < steps_.size(); ++s) {
    const auto& step = steps_[s];
    double* out = buf.data() + s * rows;
    switch (step.kind) {
      case OpKind::Var: {
        const auto col = bound[step.var_index];
        std::copy_n(col.begin(), rows, out);
        break;
      }
      case OpKind::Const:
        std::fill_n(out, rows, 1.0);
        break;
      case OpKind::Add:
      case OpKind::Mul: {
        const bool add = step.kind == OpKind::Add;
        std::fill_n(out, rows, add ? 0.0 : 1.0);
        for (const auto& in : step.inputs) {
          const double* src = buf.data() + in.slot * rows;
          for (std::size_t r = 0; r < rows; ++r) {
            double v = src[r];
            if (in.child_kind == OpKind::Pow) {
              v = guarded_pow(v, in.feature);
            } else if (in.child_kind == OpKind::Log) {
              v = guarded_log(v, in.feature);
            } else if (add) {
              v *= in.feature;
            }
            out[r] = add ? out[r] + v : out[r] * v;
          }
        }
        break;
      }
      case OpKind::Pow:
      case OpKind::Log: {
        // Pass-through: the operator itself is applied on the parent edge.
        const auto& in = step.inputs.front();
        const double* src = buf.data() + in.slot * rows;
        for (std::size_t r = 0; r < rows; ++r) {
          double v = src[r];
          if (in.child_kind == OpKind::Pow) v = guarded_pow(v, in.feature);
          else if (in.child_kind == OpKind::Log) v = guarded_log(v, in.feature);
          out[r] = v;
        }
        break;
      }
    }
  }

  TermMatrix m;
  m.rows = rows;
  m.terms = term_inputs_.size();
  m.values.resize(rows * m.terms);
  m.row_finite.assign(rows, true);
  for (std::size_t j = 0; j < m.terms; ++j) {
    const auto& in = term_inputs_[j];
    const double* src = buf.data() + in.slot * rows;
    for (std::size_t r = 0; r < rows; ++r) {
      double v = src[r];
      if (in.child_kind == OpKind::Pow) v = guarded_pow(v, in.feature);
      else if (in.child_kind == OpKind::Log) v = guarded_log(v, in.feature);
      m.values[r * m.terms + j] = v;
      if (!std::isfinite(v)) m.row_finite[r] = false;
    }
  }
  return m;
}

namespace {

std::vector<ColumnBinding> bind_dataset(const Dataset& data) {
  std::vector<ColumnBinding> out;
  for (const auto& name : data.variable_names()) out.push_back({name, data.column(name)});
  return out;
}

// Root value as the coefficient-weighted sum of term values; the same
// summation order everywhere keeps single and batch results identical.
double combine_row(const TermMatrix& m, std::span<const double> coefficients, std::size_t r) {
  double sum = 0.0;
  for (std::size_t j = 0; j < m.terms; ++j) sum += coefficients[j] * m.at(r, j);
  return sum;
}

// Pow/Log root children carry no coefficient.
std::vector<double> effective_coefficients(const ExprGraph& graph) {
  std::vector<double> out;
  for (auto k : graph.out_edges(graph.root())) {
    const auto& e = graph.edges()[k];
    const auto kind = graph.node(e.to).kind;
    out.push_back(kind == OpKind::Pow || kind == OpKind::Log ? 1.0 : e.feature);
  }
  return out;
}

}  // namespace

TermMatrix term_values(const ExprGraph& graph, std::span<const ColumnBinding> columns,
                       std::size_t rows) {
  return CompiledGraph(graph).run(columns, rows);
}

TermMatrix term_values(const ExprGraph& graph, const Dataset& data) {
  const auto cols = bind_dataset(data);
  return term_values(graph, cols, data.rows());
}

double evaluate(const ExprGraph& graph, const Assignment& assignment) {
  const CompiledGraph program(graph);
  std::vector<double> storage;
  storage.reserve(program.variables().size());
  std::vector<ColumnBinding> cols;
  for (const auto& name : program.variables()) {
    const auto it = assignment.find(name);
    if (it == assignment.end()) {
      throw Error(ErrorKind::UnboundVariable, "variable '" + name + "' is not assigned");
    }
    storage.push_back(it->second);
  }
  for (std::size_t v = 0; v < storage.size(); ++v) {
    cols.push_back({program.variables()[v], std::span<const double>(&storage[v], 1)});
  }
  const auto m = program.run(cols, 1);
  const auto coeffs = effective_coefficients(graph);
  const double value = combine_row(m, coeffs, 0);
  if (!m.row_finite[0] || !std::isfinite(value)) {
    throw Error(ErrorKind::NonFinite, "expression is not finite at the given point");
  }
  return value;
}

BatchResult evaluate_batch(const ExprGraph& graph, const Dataset& data) {
  const auto m = term_values(graph, data);
  const auto coeffs = effective_coefficients(graph);
  BatchResult out;
  out.values.resize(m.rows);
  out.finite.resize(m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double v = combine_row(m, coeffs, r);
    const bool ok = m.row_finite[r] && std::isfinite(v);
    out.values[r] = ok ? v : kNaN;
    out.finite[r] = ok;
  }
  return out;
}

}  // namespace corona::expr

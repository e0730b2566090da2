#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace corona::expr {

enum class OpKind : std::uint8_t { Add, Mul, Pow, Log, Var, Const };

std::string_view to_string(OpKind kind) noexcept;
std::optional<OpKind> parse_op_kind(std::string_view text) noexcept;

using NodeId = std::uint32_t;

struct Node {
  NodeId id = 0;
  OpKind kind = OpKind::Const;
  std::string name;  // only meaningful for Var

  bool operator==(const Node&) const = default;
};

/// Directed edge parent -> child. The feature is the exponent when the child
/// is a Pow node, the log base when the child is a Log node, the coefficient
/// when the parent is an Add node, and 1 otherwise.
struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  double feature = 1.0;

  bool operator==(const Edge&) const = default;
};

enum class ViolationKind {
  DuplicateId,
  DanglingEdge,
  Cycle,
  Unreachable,
  Arity,
  RootKind,
  TermCount,
  TermRoot,
  MissingFeature,
  FixedFeature,
  InvalidBase,
};

std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
  ViolationKind kind;
  std::string detail;
};

/// Attributed DAG for one candidate equation. Immutable once built; every
/// transformation returns a new graph. The constructor accepts malformed
/// input so that validate() can report on it.
class ExprGraph {
 public:
  ExprGraph() = default;
  ExprGraph(std::vector<Node> nodes, std::vector<Edge> edges, NodeId root);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  NodeId root() const noexcept { return root_; }

  /// Index into nodes() for an id, if the id exists.
  std::optional<std::size_t> index_of(NodeId id) const;
  const Node& node(NodeId id) const;

  /// Edge indices leaving a node, in insertion order.
  std::span<const std::size_t> out_edges(NodeId id) const;

  std::size_t node_count() const noexcept { return nodes_.size(); }

  /// Root-level terms: edges leaving the root, in order.
  std::size_t term_count() const;
  std::vector<double> coefficients() const;
  ExprGraph with_coefficients(std::span<const double> coefficients) const;

  /// Sorted, de-duplicated variable names referenced by the graph.
  std::vector<std::string> variables() const;

  bool operator==(const ExprGraph& other) const {
    return root_ == other.root_ && nodes_ == other.nodes_ && edges_ == other.edges_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  NodeId root_ = 0;

  std::unordered_map<NodeId, std::size_t> index_;
  // CSR adjacency by node index.
  std::vector<std::size_t> adjacency_offsets_;
  std::vector<std::size_t> adjacency_;
};

/// Checks acyclicity, reachability, arity, root kind, term count, and edge
/// feature admissibility. Never throws.
std::vector<Violation> validate(const ExprGraph& graph, std::size_t max_terms);
bool is_valid(const ExprGraph& graph, std::size_t max_terms);

/// Incremental construction with sequential ids starting at 0.
class GraphBuilder {
 public:
  NodeId add_node(OpKind kind, std::string name = {});
  NodeId add_var(std::string name) { return add_node(OpKind::Var, std::move(name)); }
  NodeId add_const() { return add_node(OpKind::Const); }
  void connect(NodeId from, NodeId to, double feature = 1.0);

  /// Deep-copies the sub-DAG of `source` reachable from `node` (shared nodes
  /// become separate copies) and returns the id of the copied node.
  NodeId import(const ExprGraph& source, NodeId node);

  ExprGraph build(NodeId root) &&;

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
};

/// A root-level term detached from its graph: the body's root is the term
/// node, and the coefficient is the Add edge feature that scaled it.
struct Term {
  ExprGraph body;
  double coefficient = 1.0;
};

std::vector<Term> split_terms(const ExprGraph& graph);
ExprGraph join_terms(std::span<const Term> terms);

/// Canonical copy: tree-shaped, ids assigned in depth-first preorder.
ExprGraph canonicalize(const ExprGraph& graph);

}  // namespace corona::expr

#include "corona/expr/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "corona/error.hpp"

namespace corona::expr {

std::string_view to_string(OpKind kind) noexcept {
  switch (kind) {
    case OpKind::Add: return "add";
    case OpKind::Mul: return "mul";
    case OpKind::Pow: return "pow";
    case OpKind::Log: return "log";
    case OpKind::Var: return "var";
    case OpKind::Const: return "const";
  }
  return "?";
}

std::optional<OpKind> parse_op_kind(std::string_view text) noexcept {
  for (auto kind : {OpKind::Add, OpKind::Mul, OpKind::Pow, OpKind::Log, OpKind::Var,
                    OpKind::Const}) {
    if (to_string(kind) == text) return kind;
  }
  return std::nullopt;
}

std::string_view to_string(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::DuplicateId: return "DuplicateId";
    case ViolationKind::DanglingEdge: return "DanglingEdge";
    case ViolationKind::Cycle: return "CycleViolation";
    case ViolationKind::Unreachable: return "Unreachable";
    case ViolationKind::Arity: return "ArityViolation";
    case ViolationKind::RootKind: return "RootKindViolation";
    case ViolationKind::TermCount: return "TermCountViolation";
    case ViolationKind::TermRoot: return "TermRootViolation";
    case ViolationKind::MissingFeature: return "MissingFeature";
    case ViolationKind::FixedFeature: return "FixedFeature";
    case ViolationKind::InvalidBase: return "InvalidBase";
  }
  return "?";
}

ExprGraph::ExprGraph(std::vector<Node> nodes, std::vector<Edge> edges, NodeId root)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), root_(root) {
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i].id, i);

  adjacency_offsets_.assign(nodes_.size() + 1, 0);
  for (const auto& e : edges_) {
    if (auto it = index_.find(e.from); it != index_.end()) ++adjacency_offsets_[it->second + 1];
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) adjacency_offsets_[i + 1] += adjacency_offsets_[i];
  adjacency_.resize(adjacency_offsets_.back());
  std::vector<std::size_t> fill(adjacency_offsets_.begin(), adjacency_offsets_.end() - 1);
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    if (auto it = index_.find(edges_[k].from); it != index_.end()) adjacency_[fill[it->second]++] = k;
  }
}

std::optional<std::size_t> ExprGraph::index_of(NodeId id) const {
  if (auto it = index_.find(id); it != index_.end()) return it->second;
  return std::nullopt;
}

const Node& ExprGraph::node(NodeId id) const {
  auto idx = index_of(id);
  if (!idx) throw Error(ErrorKind::InvalidInput, "unknown node id " + std::to_string(id));
  return nodes_[*idx];
}

std::span<const std::size_t> ExprGraph::out_edges(NodeId id) const {
  auto idx = index_of(id);
  if (!idx) return {};
  const auto begin = adjacency_offsets_[*idx];
  const auto end = adjacency_offsets_[*idx + 1];
  return std::span<const std::size_t>(adjacency_).subspan(begin, end - begin);
}

std::size_t ExprGraph::term_count() const { return out_edges(root_).size(); }

std::vector<double> ExprGraph::coefficients() const {
  std::vector<double> out;
  for (auto k : out_edges(root_)) out.push_back(edges_[k].feature);
  return out;
}

ExprGraph ExprGraph::with_coefficients(std::span<const double> coefficients) const {
  const auto root_edges = out_edges(root_);
  if (coefficients.size() != root_edges.size()) {
    throw Error(ErrorKind::InvalidInput, "coefficient count does not match term count");
  }
  auto edges = edges_;
  for (std::size_t j = 0; j < root_edges.size(); ++j) edges[root_edges[j]].feature = coefficients[j];
  return ExprGraph(nodes_, std::move(edges), root_);
}

std::vector<std::string> ExprGraph::variables() const {
  std::set<std::string> names;
  for (const auto& n : nodes_) {
    if (n.kind == OpKind::Var) names.insert(n.name);
  }
  return {names.begin(), names.end()};
}

namespace {

bool is_log_base(double b) {
  return std::abs(b - 10.0) < 1e-12 || std::abs(b - std::numbers::e) < 1e-12;
}

std::string describe(NodeId id) { return "node " + std::to_string(id); }

}  // namespace

std::vector<Violation> validate(const ExprGraph& graph, std::size_t max_terms) {
  std::vector<Violation> out;
  const auto& nodes = graph.nodes();

  std::set<NodeId> seen;
  for (const auto& n : nodes) {
    if (!seen.insert(n.id).second) out.push_back({ViolationKind::DuplicateId, describe(n.id)});
  }

  for (const auto& e : graph.edges()) {
    if (!graph.index_of(e.from) || !graph.index_of(e.to)) {
      out.push_back({ViolationKind::DanglingEdge,
                     std::to_string(e.from) + "->" + std::to_string(e.to)});
    }
  }

  const auto root_idx = graph.index_of(graph.root());
  if (!root_idx) {
    out.push_back({ViolationKind::RootKind, "root id does not exist"});
    return out;
  }

  // Iterative DFS with colors for cycle detection and reachability.
  enum class Color : std::uint8_t { White, Grey, Black };
  std::vector<Color> color(nodes.size(), Color::White);
  std::vector<std::pair<std::size_t, std::size_t>> stack;  // node index, next edge slot
  stack.emplace_back(*root_idx, 0);
  color[*root_idx] = Color::Grey;
  bool cycle_reported = false;
  while (!stack.empty()) {
    auto& [idx, slot] = stack.back();
    const auto outs = graph.out_edges(nodes[idx].id);
    if (slot == outs.size()) {
      color[idx] = Color::Black;
      stack.pop_back();
      continue;
    }
    const auto& e = graph.edges()[outs[slot++]];
    const auto child = graph.index_of(e.to);
    if (!child) continue;
    if (color[*child] == Color::Grey) {
      if (!cycle_reported) {
        out.push_back({ViolationKind::Cycle, std::to_string(e.from) + "->" + std::to_string(e.to)});
        cycle_reported = true;
      }
    } else if (color[*child] == Color::White) {
      color[*child] = Color::Grey;
      stack.emplace_back(*child, 0);
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (color[i] == Color::White) out.push_back({ViolationKind::Unreachable, describe(nodes[i].id)});
  }

  for (const auto& n : nodes) {
    const auto outs = graph.out_edges(n.id);
    const auto arity = outs.size();
    bool ok = true;
    switch (n.kind) {
      case OpKind::Add:
      case OpKind::Mul: ok = arity >= 1; break;
      case OpKind::Pow:
      case OpKind::Log: ok = arity == 1; break;
      case OpKind::Var:
      case OpKind::Const: ok = arity == 0; break;
    }
    if (!ok) {
      out.push_back({ViolationKind::Arity, describe(n.id) + " (" + std::string(to_string(n.kind)) +
                                               ") has " + std::to_string(arity) + " children"});
    }
    if (n.kind == OpKind::Var && n.name.empty()) {
      out.push_back({ViolationKind::Arity, describe(n.id) + " is an unnamed variable"});
    }
  }

  const auto& root = nodes[*root_idx];
  if (root.kind != OpKind::Add) {
    out.push_back({ViolationKind::RootKind, "root is " + std::string(to_string(root.kind))});
  } else {
    const auto terms = graph.term_count();
    if (terms > max_terms) {
      out.push_back({ViolationKind::TermCount, std::to_string(terms) + " terms exceed maximum " +
                                                   std::to_string(max_terms)});
    }
    for (auto k : graph.out_edges(root.id)) {
      const auto child = graph.index_of(graph.edges()[k].to);
      if (!child) continue;
      const auto kind = nodes[*child].kind;
      if (kind == OpKind::Pow || kind == OpKind::Log) {
        out.push_back({ViolationKind::TermRoot,
                       "term " + describe(nodes[*child].id) + " is a bare " +
                           std::string(to_string(kind)) + " and cannot carry a coefficient"});
      }
    }
  }

  for (const auto& e : graph.edges()) {
    const auto parent = graph.index_of(e.from);
    const auto child = graph.index_of(e.to);
    if (!parent || !child) continue;
    const auto ck = nodes[*child].kind;
    const auto pk = nodes[*parent].kind;
    const auto where = std::to_string(e.from) + "->" + std::to_string(e.to);
    if (!std::isfinite(e.feature)) {
      out.push_back({ViolationKind::MissingFeature, where});
      continue;
    }
    if (ck == OpKind::Pow) {
      if (e.feature == 0.0) out.push_back({ViolationKind::MissingFeature, where + " exponent is 0"});
    } else if (ck == OpKind::Log) {
      if (!is_log_base(e.feature)) out.push_back({ViolationKind::InvalidBase, where});
    } else if (pk != OpKind::Add && e.feature != 1.0) {
      out.push_back({ViolationKind::FixedFeature, where});
    }
  }
  return out;
}

bool is_valid(const ExprGraph& graph, std::size_t max_terms) {
  return validate(graph, max_terms).empty();
}

NodeId GraphBuilder::add_node(OpKind kind, std::string name) {
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back({id, kind, std::move(name)});
  return id;
}

void GraphBuilder::connect(NodeId from, NodeId to, double feature) {
  edges_.push_back({from, to, feature});
}

NodeId GraphBuilder::import(const ExprGraph& source, NodeId node) {
  // Depth guard doubles as a cycle guard; valid graphs are far shallower.
  struct Frame {
    const ExprGraph& g;
    GraphBuilder& b;
    NodeId copy(NodeId id, int depth) {
      if (depth > 256) throw Error(ErrorKind::InvalidInput, "graph too deep or cyclic");
      const auto& n = g.node(id);
      const auto mine = b.add_node(n.kind, n.name);
      for (auto k : g.out_edges(id)) {
        const auto& e = g.edges()[k];
        const auto child = copy(e.to, depth + 1);
        b.connect(mine, child, e.feature);
      }
      return mine;
    }
  };
  Frame f{source, *this};
  return f.copy(node, 0);
}

ExprGraph GraphBuilder::build(NodeId root) && {
  return ExprGraph(std::move(nodes_), std::move(edges_), root);
}

std::vector<Term> split_terms(const ExprGraph& graph) {
  std::vector<Term> out;
  for (auto k : graph.out_edges(graph.root())) {
    const auto& e = graph.edges()[k];
    GraphBuilder b;
    const auto r = b.import(graph, e.to);
    out.push_back({std::move(b).build(r), e.feature});
  }
  return out;
}

ExprGraph join_terms(std::span<const Term> terms) {
  GraphBuilder b;
  const auto root = b.add_node(OpKind::Add);
  for (const auto& t : terms) {
    const auto top = b.import(t.body, t.body.root());
    b.connect(root, top, t.coefficient);
  }
  return std::move(b).build(root);
}

ExprGraph canonicalize(const ExprGraph& graph) {
  GraphBuilder b;
  const auto root = b.import(graph, graph.root());
  return std::move(b).build(root);
}

}  // namespace corona::expr

#include "corona/expr/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "corona/error.hpp"
#include "corona/expr/templates.hpp"

namespace corona::expr {

std::string format_coefficient(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.6g", value);
  return buf;
}

namespace {

std::string format_compact(double value) {
  char buf[64];
  if (value == std::round(value) && std::abs(value) < 1e9) {
    std::snprintf(buf, sizeof buf, "%d", static_cast<int>(value));
  } else {
    std::snprintf(buf, sizeof buf, "%.6g", value);
  }
  return buf;
}

std::string log_name(double base) {
  if (std::abs(base - 10.0) < 1e-12) return "log10";
  if (std::abs(base - std::numbers::e) < 1e-12) return "ln";
  return "log[" + format_compact(base) + "]";
}

std::string node_text(const ExprGraph& g, NodeId id, int depth);

// Text for a child as seen through an edge: applies exponent/base.
std::string through_edge(const ExprGraph& g, const Edge& e, int depth) {
  const auto& child = g.node(e.to);
  if (child.kind == OpKind::Pow) {
    const auto& inner_edge = g.edges()[g.out_edges(child.id).front()];
    const auto inner = through_edge(g, inner_edge, depth + 1);
    if (e.feature == 1.0) return inner;
    const auto& inner_node = g.node(inner_edge.to);
    const bool atomic = inner_node.kind == OpKind::Var || inner_node.kind == OpKind::Add;
    return (atomic ? inner : "(" + inner + ")") + "^" + format_compact(e.feature);
  }
  if (child.kind == OpKind::Log) {
    const auto& inner_edge = g.edges()[g.out_edges(child.id).front()];
    return log_name(e.feature) + "(" + through_edge(g, inner_edge, depth + 1) + ")";
  }
  return node_text(g, e.to, depth + 1);
}

std::string node_text(const ExprGraph& g, NodeId id, int depth) {
  if (depth > 256) throw Error(ErrorKind::InvalidInput, "graph too deep or cyclic");
  const auto& n = g.node(id);
  switch (n.kind) {
    case OpKind::Var: return n.name;
    case OpKind::Const: return "1";
    case OpKind::Mul: {
      std::vector<std::string> factors;
      for (auto k : g.out_edges(id)) {
        auto f = through_edge(g, g.edges()[k], depth);
        if (f != "1") factors.push_back(std::move(f));
      }
      if (factors.empty()) return "1";
      std::sort(factors.begin(), factors.end());
      std::string out = factors.front();
      for (std::size_t i = 1; i < factors.size(); ++i) out += "*" + factors[i];
      return out;
    }
    case OpKind::Add: {
      std::vector<std::string> parts;
      for (auto k : g.out_edges(id)) {
        const auto& e = g.edges()[k];
        const auto ck = g.node(e.to).kind;
        const auto body = through_edge(g, e, depth);
        if (ck == OpKind::Pow || ck == OpKind::Log) {
          parts.push_back(body);
        } else if (ck == OpKind::Const) {
          parts.push_back(format_compact(e.feature));
        } else if (e.feature == 1.0) {
          parts.push_back(body);
        } else if (e.feature == -1.0) {
          parts.push_back("-" + body);
        } else {
          parts.push_back(format_compact(e.feature) + "*" + body);
        }
      }
      std::sort(parts.begin(), parts.end());
      std::string out = "(" + parts.front();
      for (std::size_t i = 1; i < parts.size(); ++i) out += "+" + parts[i];
      return out + ")";
    }
    case OpKind::Pow:
    case OpKind::Log: {
      // Only reachable for malformed root-level placement.
      return through_edge(g, g.edges()[g.out_edges(id).front()], depth);
    }
  }
  return "?";
}

}  // namespace

std::string render_term_body(const ExprGraph& body) { return node_text(body, body.root(), 0); }

std::string render(const ExprGraph& graph) {
  struct Rendered {
    TemplateKind kind;
    std::string body;
    std::string text;
  };
  std::vector<Rendered> terms;
  for (const auto& t : split_terms(graph)) {
    const auto kind = classify_term(t.body);
    auto body = render_term_body(t.body);
    auto text = kind == TemplateKind::Constant ? format_coefficient(t.coefficient)
                                               : format_coefficient(t.coefficient) + "*" + body;
    terms.push_back({kind, std::move(body), std::move(text)});
  }
  if (terms.empty()) return "0";
  std::stable_sort(terms.begin(), terms.end(), [](const Rendered& a, const Rendered& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.body != b.body) return a.body < b.body;
    return a.text < b.text;
  });
  std::string out = terms.front().text;
  for (std::size_t i = 1; i < terms.size(); ++i) out += " + " + terms[i].text;
  return out;
}

nlohmann::json to_json(const ExprGraph& graph) {
  auto nodes = nlohmann::json::array();
  for (const auto& n : graph.nodes()) {
    nlohmann::json jn{{"id", n.id}, {"kind", to_string(n.kind)}};
    if (n.kind == OpKind::Var) jn["name"] = n.name;
    nodes.push_back(std::move(jn));
  }
  auto edges = nlohmann::json::array();
  for (const auto& e : graph.edges()) {
    edges.push_back({{"from", e.from}, {"to", e.to}, {"feature", e.feature}});
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}, {"root", graph.root()}};
}

ExprGraph graph_from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& what) -> ExprGraph {
    throw Error(ErrorKind::InvalidInput, "graph JSON: " + what);
  };
  if (!j.is_object()) return fail("expected an object");
  for (const auto& key : {"nodes", "edges", "root"}) {
    if (!j.contains(key)) return fail(std::string("missing '") + key + "'");
  }
  if (!j["nodes"].is_array() || !j["edges"].is_array()) return fail("nodes/edges must be arrays");
  if (!j["root"].is_number_unsigned()) return fail("root must be a non-negative integer");

  std::vector<Node> nodes;
  for (const auto& jn : j["nodes"]) {
    if (!jn.is_object() || !jn.contains("id") || !jn.contains("kind")) return fail("bad node entry");
    if (!jn["id"].is_number_unsigned()) return fail("node id must be a non-negative integer");
    if (!jn["kind"].is_string()) return fail("node kind must be a string");
    const auto kind = parse_op_kind(jn["kind"].get<std::string>());
    if (!kind) return fail("unknown node kind '" + jn["kind"].get<std::string>() + "'");
    Node n{jn["id"].get<NodeId>(), *kind, {}};
    if (*kind == OpKind::Var) {
      if (!jn.contains("name") || !jn["name"].is_string()) return fail("var node needs a name");
      n.name = jn["name"].get<std::string>();
    }
    nodes.push_back(std::move(n));
  }
  std::vector<Edge> edges;
  for (const auto& je : j["edges"]) {
    if (!je.is_object() || !je.contains("from") || !je.contains("to") || !je.contains("feature")) {
      return fail("bad edge entry");
    }
    if (!je["from"].is_number_unsigned() || !je["to"].is_number_unsigned() ||
        !je["feature"].is_number()) {
      return fail("edge fields must be numbers");
    }
    edges.push_back({je["from"].get<NodeId>(), je["to"].get<NodeId>(), je["feature"].get<double>()});
  }
  return ExprGraph(std::move(nodes), std::move(edges), j["root"].get<NodeId>());
}

}  // namespace corona::expr

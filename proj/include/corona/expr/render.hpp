#pragma once

#include <string>

#include "json.hpp"

#include "corona/expr/graph.hpp"

namespace corona::expr {

/// Canonical infix form. Terms are ordered by (kind, body text) and joined
/// with " + "; coefficients use 6 significant digits ("2.00000*x^2").
/// Structurally equal graphs render identically regardless of node ids.
std::string render(const ExprGraph& graph);

/// Body of one term without its coefficient, e.g. "E*n" or "log10(d)".
std::string render_term_body(const ExprGraph& body);

std::string format_coefficient(double value);

/// {nodes:[{id,kind,name?}], edges:[{from,to,feature}], root}
nlohmann::json to_json(const ExprGraph& graph);
/// Throws Error(InvalidInput) on schema errors; does not validate structure.
ExprGraph graph_from_json(const nlohmann::json& j);

}  // namespace corona::expr

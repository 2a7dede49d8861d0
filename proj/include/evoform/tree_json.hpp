#pragma once

#include "json.hpp"
#include <string_view>

#include "evoform/expression.hpp"

namespace evoform {

// Hand-written trees as JSON, e.g.
//   {"binary": "+", "left": {"var": "x"},
//    "right": {"const": 7.0, "unary": "cos"}}
// Each node may carry an optional "unary" of sin, cos, or tan.
ExpressionTree tree_from_json(const nlohmann::json& j);
nlohmann::json tree_to_json(const ExpressionTree& tree);

ExpressionTree tree_from_json_text(std::string_view text);

}  // namespace evoform

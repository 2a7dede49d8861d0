#include "evoform/tree_json.hpp"

#include <string>

#include "evoform/error.hpp"

namespace evoform {

namespace {

using nlohmann::json;

UnaryOp parse_unary(const json& j) {
  if (!j.contains("unary")) return UnaryOp::kIdentity;
  const auto name = j.at("unary").get<std::string>();
  if (name == "id" || name == "identity") return UnaryOp::kIdentity;
  if (name == "sin") return UnaryOp::kSin;
  if (name == "cos") return UnaryOp::kCos;
  if (name == "tan") return UnaryOp::kTan;
  throw Error(ErrorCode::kParse, "unknown unary operator '" + name + "'");
}

BinaryOp parse_binary(const std::string& s) {
  if (s == "+") return BinaryOp::kAdd;
  if (s == "-") return BinaryOp::kSub;
  if (s == "*") return BinaryOp::kMul;
  if (s == "/") return BinaryOp::kDiv;
  throw Error(ErrorCode::kParse, "unknown binary operator '" + s + "'");
}

Axis parse_axis(const std::string& s) {
  if (s == "x") return Axis::kX;
  if (s == "y") return Axis::kY;
  if (s == "z") return Axis::kZ;
  if (s == "t" || s == "time") return Axis::kT;
  throw Error(ErrorCode::kParse, "unknown variable '" + s + "'");
}

json node_to_json(const ExpressionTree& tree, std::size_t i) {
  const ExprNode& n = tree.node(i);
  json j;
  switch (n.kind) {
    case ExprNode::Kind::kBinary:
      j["binary"] = std::string(1, binary_op_symbol(n.op));
      j["left"] = node_to_json(tree, static_cast<std::size_t>(n.left));
      j["right"] = node_to_json(tree, static_cast<std::size_t>(n.right));
      break;
    case ExprNode::Kind::kVariable:
      j["var"] = std::string(1, axis_name(n.var));
      break;
    case ExprNode::Kind::kConstant:
      j["const"] = n.value;
      break;
  }
  if (n.unary != UnaryOp::kIdentity) j["unary"] = unary_op_name(n.unary);
  return j;
}

}  // namespace

ExpressionTree tree_from_json(const json& j) {
  try {
    const UnaryOp unary = parse_unary(j);
    if (j.contains("binary")) {
      return ExpressionTree::binary(parse_binary(j.at("binary").get<std::string>()),
                                    tree_from_json(j.at("left")),
                                    tree_from_json(j.at("right")), unary);
    }
    if (j.contains("var")) {
      return ExpressionTree::variable(parse_axis(j.at("var").get<std::string>()),
                                      unary);
    }
    if (j.contains("const")) {
      return ExpressionTree::constant(j.at("const").get<double>(), unary);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("tree json: ") + e.what());
  }
  throw Error(ErrorCode::kParse,
              "tree node needs one of \"binary\", \"var\", \"const\"");
}

json tree_to_json(const ExpressionTree& tree) {
  return node_to_json(tree, tree.root());
}

ExpressionTree tree_from_json_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("tree json: ") + e.what());
  }
  return tree_from_json(j);
}

}  // namespace evoform

#include "evoform/expression.hpp"

#include <algorithm>
#include <cmath>

#include "evoform/error.hpp"
#include "evoform/format.hpp"

namespace evoform {

namespace {

double clamp_node(double v) { return std::clamp(v, -kNodeClamp, kNodeClamp); }

double apply_binary(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::kAdd:
      return a + b;
    case BinaryOp::kSub:
      return a - b;
    case BinaryOp::kMul:
      return a * b;
    case BinaryOp::kDiv:
      return std::fabs(b) < kDivisionEpsilon ? a : a / b;
  }
  return a;
}

double apply_unary(UnaryOp op, double a) {
  switch (op) {
    case UnaryOp::kIdentity:
      return a;
    case UnaryOp::kSin:
      return std::sin(a);
    case UnaryOp::kCos:
      return std::cos(a);
    case UnaryOp::kTan:
      return std::tan(a);
  }
  return a;
}

double read_var(Axis axis, const Vertex& v, TimeParam t) {
  switch (axis) {
    case Axis::kX:
      return v.x;
    case Axis::kY:
      return v.y;
    case Axis::kZ:
      return v.z;
    case Axis::kT:
      return t.value();
  }
  return 0.0;
}

double eval_node(const ExpressionTree& tree, std::size_t i, const Vertex& v,
                 TimeParam t) {
  const ExprNode& n = tree.node(i);
  double raw = 0.0;
  switch (n.kind) {
    case ExprNode::Kind::kBinary:
      raw = apply_binary(n.op, eval_node(tree, n.left, v, t),
                         eval_node(tree, n.right, v, t));
      break;
    case ExprNode::Kind::kVariable:
      raw = read_var(n.var, v, t);
      break;
    case ExprNode::Kind::kConstant:
      raw = n.value;
      break;
  }
  return clamp_node(apply_unary(n.unary, clamp_node(raw)));
}

void emit_node(const ExpressionTree& tree, std::size_t i, std::string& out) {
  const ExprNode& n = tree.node(i);
  const bool wrapped = n.unary != UnaryOp::kIdentity;
  if (wrapped) {
    out += unary_op_name(n.unary);
    out += '(';
  }
  switch (n.kind) {
    case ExprNode::Kind::kBinary:
      out += '(';
      emit_node(tree, n.left, out);
      out += ' ';
      out += binary_op_symbol(n.op);
      out += ' ';
      emit_node(tree, n.right, out);
      out += ')';
      break;
    case ExprNode::Kind::kVariable:
      out += n.var == Axis::kT ? std::string("time")
                               : std::string("p.") + axis_name(n.var);
      break;
    case ExprNode::Kind::kConstant:
      out += format_fixed(n.value, 4);
      break;
  }
  if (wrapped) out += ')';
}

void require_channels(ChannelMask channels) {
  if (channels.empty()) {
    throw Error(ErrorCode::kInvalidMask, "channel mask is empty");
  }
}

}  // namespace

TimeParam::TimeParam(double t) {
  if (!std::isfinite(t)) {
    throw Error(ErrorCode::kInvalidArgument, "time must be finite");
  }
  double w = std::fmod(t, kPeriod);
  if (w < 0.0) w += kPeriod;
  if (w >= kPeriod) w = 0.0;
  t_ = w;
}

ExpressionTree ExpressionTree::variable(Axis axis, UnaryOp unary) {
  ExpressionTree t;
  t.nodes_.clear();
  ExprNode n;
  n.kind = ExprNode::Kind::kVariable;
  n.var = axis;
  n.unary = unary;
  t.nodes_.push_back(n);
  t.active_vars_ = VariableMask(static_cast<std::uint8_t>(
      1u << static_cast<int>(axis)));
  return t;
}

ExpressionTree ExpressionTree::constant(double value, UnaryOp unary) {
  ExpressionTree t;
  t.nodes_.clear();
  ExprNode n;
  n.kind = ExprNode::Kind::kConstant;
  n.value = value;
  n.unary = unary;
  t.nodes_.push_back(n);
  return t;
}

std::size_t ExpressionTree::append(const ExpressionTree& sub) {
  const auto offset = static_cast<std::int32_t>(nodes_.size());
  for (ExprNode n : sub.nodes_) {
    if (n.left >= 0) n.left += offset;
    if (n.right >= 0) n.right += offset;
    nodes_.push_back(n);
  }
  return sub.root_ + static_cast<std::size_t>(offset);
}

ExpressionTree ExpressionTree::binary(BinaryOp op, const ExpressionTree& lhs,
                                      const ExpressionTree& rhs,
                                      UnaryOp unary) {
  ExpressionTree t;
  t.nodes_.clear();
  ExprNode n;
  n.kind = ExprNode::Kind::kBinary;
  n.op = op;
  n.unary = unary;
  t.nodes_.push_back(n);
  const std::size_t l = t.append(lhs);
  const std::size_t r = t.append(rhs);
  t.nodes_[0].left = static_cast<std::int32_t>(l);
  t.nodes_[0].right = static_cast<std::int32_t>(r);
  t.depth_ = 1 + std::max(lhs.depth_, rhs.depth_);
  t.active_vars_ = lhs.active_vars_ | rhs.active_vars_;
  return t;
}

VariableMask ExpressionTree::referenced_vars() const {
  VariableMask out;
  for (const auto& n : nodes_) {
    if (n.kind == ExprNode::Kind::kVariable) {
      out |= VariableMask(static_cast<std::uint8_t>(1u << static_cast<int>(n.var)));
    }
  }
  return out;
}

double payload_constant(std::uint8_t payload) {
  const double raw = -10.0 + 20.0 * static_cast<double>(payload) / 255.0;
  return std::round(raw * 1e4) / 1e4;
}

VariableMask active_variables(const Genome& genome, const SearchSpace& space) {
  const VariableMask own = effective_variables(genome);
  if (space.variables.empty()) return own;
  const VariableMask both = own & space.variables;
  return both.empty() ? space.variables : both;
}

ExpressionTree build_tree(const Genome& genome, const SearchSpace& space) {
  const CodecConfig& c = genome.config;
  const VariableMask active = active_variables(genome, space);
  const std::vector<Axis> order = active.members();

  ExpressionTree tree;
  tree.nodes_.resize(c.node_count());
  tree.depth_ = c.depth();
  tree.active_vars_ = active;
  tree.root_ = 0;

  for (std::size_t i = 0; i < c.node_count(); ++i) {
    ExprNode& n = tree.nodes_[i];
    n.unary = genome.unary_ops[i];
    if (i < c.internal_count()) {
      n.kind = ExprNode::Kind::kBinary;
      n.op = genome.binary_ops[i];
      n.left = static_cast<std::int32_t>(left_child(i));
      n.right = static_cast<std::int32_t>(right_child(i));
      continue;
    }
    const Leaf& leaf = genome.leaves[i - c.internal_count()];
    if (leaf.is_constant()) {
      n.kind = ExprNode::Kind::kConstant;
      n.value = payload_constant(leaf.payload);
      continue;
    }
    n.kind = ExprNode::Kind::kVariable;
    const auto axis = static_cast<Axis>(leaf.kind);
    n.var = active.contains(axis) ? axis : order[leaf.kind % order.size()];
  }
  return tree;
}

double evaluate(const ExpressionTree& tree, const Vertex& v, TimeParam t) {
  const double e = eval_node(tree, tree.root(), v, t);
  return std::clamp(e, -kResultClamp, kResultClamp);
}

Vertex displace(const ExpressionTree& tree, ChannelMask channels,
                const Vertex& v, TimeParam t) {
  require_channels(channels);
  const double e = evaluate(tree, v, t);
  Vertex out = v;
  if (channels.contains(Axis::kX)) out.x += e;
  if (channels.contains(Axis::kY)) out.y += e;
  if (channels.contains(Axis::kZ)) out.z += e;
  return out;
}

std::string emit_expression(const ExpressionTree& tree) {
  std::string out;
  emit_node(tree, tree.root(), out);
  return out;
}

std::string emit_source(const ExpressionTree& tree, ChannelMask channels) {
  require_channels(channels);
  const std::string swizzle = channels.to_string();
  return "p." + swizzle + " = p." + swizzle + " + (" + emit_expression(tree) +
         ");";
}

}  // namespace evoform

#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "evoform/codec.hpp"

namespace evoform {

struct Vertex {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vertex&, const Vertex&) = default;
};

// Animation time wrapped into [0, 2*pi).
class TimeParam {
 public:
  static constexpr double kPeriod = 2.0 * std::numbers::pi;

  constexpr TimeParam() = default;
  explicit TimeParam(double t);

  double value() const { return t_; }

 private:
  double t_ = 0.0;
};

// Evaluation guards. Every node's value is clamped after its binary operator
// and again after its unary operator.
inline constexpr double kDivisionEpsilon = 1e-6;
inline constexpr double kNodeClamp = 1e4;
inline constexpr double kResultClamp = 1e6;

struct ExprNode {
  enum class Kind : std::uint8_t { kBinary, kVariable, kConstant };

  Kind kind = Kind::kConstant;
  BinaryOp op = BinaryOp::kAdd;  // kBinary
  Axis var = Axis::kX;           // kVariable
  double value = 0.0;            // kConstant
  UnaryOp unary = UnaryOp::kIdentity;
  std::int32_t left = -1;
  std::int32_t right = -1;
};

// Immutable operator tree. Trees decoded from genomes are full and stored in
// heap order (root 0, children 2i+1 and 2i+2); hand-built trees may have any
// shape.
class ExpressionTree {
 public:
  // The constant 0.
  ExpressionTree() : nodes_(1) {}

  static ExpressionTree variable(Axis axis, UnaryOp unary = UnaryOp::kIdentity);
  static ExpressionTree constant(double value,
                                 UnaryOp unary = UnaryOp::kIdentity);
  static ExpressionTree binary(BinaryOp op, const ExpressionTree& lhs,
                               const ExpressionTree& rhs,
                               UnaryOp unary = UnaryOp::kIdentity);

  const std::vector<ExprNode>& nodes() const { return nodes_; }
  std::size_t root() const { return root_; }
  const ExprNode& node(std::size_t i) const { return nodes_[i]; }
  int depth() const { return depth_; }
  // Variables the tree may reference.
  VariableMask active_vars() const { return active_vars_; }
  // Variables the tree actually references.
  VariableMask referenced_vars() const;

 private:
  friend ExpressionTree build_tree(const Genome&, const SearchSpace&);

  std::size_t append(const ExpressionTree& sub);

  std::vector<ExprNode> nodes_;
  std::size_t root_ = 0;
  int depth_ = 0;
  VariableMask active_vars_;
};

// Constant for a leaf payload: -10 + 20p/255 rounded to 4 decimals, so the
// emitted text carries the exact value the engine evaluates.
double payload_constant(std::uint8_t payload);

// Variables a genome's leaves may reference within `space`: the genome's own
// (normalized) variable set intersected with the space, or the space itself
// when they do not overlap.
VariableMask active_variables(const Genome& genome, const SearchSpace& space);

// Out-of-set variable leaves are remapped to element (kind mod n) of the
// active variables in canonical order.
ExpressionTree build_tree(const Genome& genome, const SearchSpace& space);

double evaluate(const ExpressionTree& tree, const Vertex& v, TimeParam t);

// Adds the expression, evaluated once at the original coordinates, to every
// selected channel. Throws kInvalidMask for an empty mask.
Vertex displace(const ExpressionTree& tree, ChannelMask channels,
                const Vertex& v, TimeParam t);

// Single statement `p.<swizzle> = p.<swizzle> + (<expr>);`.
std::string emit_source(const ExpressionTree& tree, ChannelMask channels);

// Just the right-hand expression.
std::string emit_expression(const ExpressionTree& tree);

}  // namespace evoform

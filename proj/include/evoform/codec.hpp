#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace evoform {

// Vertex coordinates and the time variable, in canonical order.
enum class Axis : std::uint8_t { kX = 0, kY = 1, kZ = 2, kT = 3 };

char axis_name(Axis axis);

// Set over the first `Width` axes; bit 0 is x.
template <int Width>
class AxisMask {
 public:
  static constexpr std::uint8_t kFull = (1u << Width) - 1;

  constexpr AxisMask() = default;
  constexpr explicit AxisMask(std::uint8_t bits) : bits_(bits & kFull) {}

  // Parses letters from "xyzt" (first Width of them); "" is the empty set.
  static AxisMask parse(std::string_view letters);

  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(Axis a) const {
    return (bits_ >> static_cast<int>(a)) & 1u;
  }
  constexpr bool subset_of(AxisMask other) const {
    return (bits_ & ~other.bits_) == 0;
  }
  constexpr int size() const {
    int n = 0;
    for (int i = 0; i < Width; ++i) n += (bits_ >> i) & 1u;
    return n;
  }
  // Members in canonical x, y, z, t order.
  std::vector<Axis> members() const;
  // Letters in canonical order, e.g. "xt".
  std::string to_string() const;

  constexpr AxisMask operator|(AxisMask o) const {
    return AxisMask(bits_ | o.bits_);
  }
  constexpr AxisMask operator&(AxisMask o) const {
    return AxisMask(bits_ & o.bits_);
  }
  AxisMask& operator|=(AxisMask o) {
    bits_ |= o.bits_;
    return *this;
  }
  friend constexpr bool operator==(AxisMask, AxisMask) = default;

 private:
  std::uint8_t bits_ = 0;
};

using ChannelMask = AxisMask<3>;   // {x, y, z}
using VariableMask = AxisMask<4>;  // {x, y, z, t}

struct SearchSpace {
  ChannelMask channels;
  VariableMask variables;

  // Throws kInvalidSpace when either mask is empty.
  void validate() const;

  friend bool operator==(const SearchSpace&, const SearchSpace&) = default;
};

enum class BinaryOp : std::uint8_t { kAdd = 0, kSub = 1, kMul = 2, kDiv = 3 };
enum class UnaryOp : std::uint8_t {
  kIdentity = 0,
  kSin = 1,
  kCos = 2,
  kTan = 3,
};

char binary_op_symbol(BinaryOp op);
const char* unary_op_name(UnaryOp op);

// Leaf kinds 0-3 select x, y, z, t; 4-7 are constants read from the payload.
struct Leaf {
  std::uint8_t kind = 0;     // 3 bits
  std::uint8_t payload = 0;  // 8 bits

  bool is_constant() const { return kind >= 4; }
  friend bool operator==(const Leaf&, const Leaf&) = default;
};

// Layout of a full binary tree of the given depth; leaves sit at `depth`.
class CodecConfig {
 public:
  static constexpr int kMaxDepth = 12;
  static constexpr std::size_t kHeaderBits = 7;
  static constexpr std::size_t kLeafBits = 11;

  explicit CodecConfig(int depth = 3);

  int depth() const { return depth_; }
  std::size_t internal_count() const { return (std::size_t{1} << depth_) - 1; }
  std::size_t node_count() const {
    return (std::size_t{1} << (depth_ + 1)) - 1;
  }
  std::size_t leaf_count() const { return std::size_t{1} << depth_; }
  std::size_t total_bits() const {
    return kHeaderBits + 2 * internal_count() + 2 * node_count() +
           kLeafBits * leaf_count();
  }
  std::size_t body_bits() const { return total_bits() - kHeaderBits; }

  friend bool operator==(const CodecConfig&, const CodecConfig&) = default;

 private:
  int depth_;
};

// A string of bits, index 0 first. Hex form is most-significant-bit first,
// left-padded with zero bits to a whole number of digits.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t size) : bits_(size, 0) {}

  static BitString from_binary(std::string_view zeros_and_ones);
  // Throws kLength if the digit count or padding does not fit `bit_count`.
  static BitString from_hex(std::string_view hex, std::size_t bit_count);

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool v) { bits_[i] = v ? 1 : 0; }
  void flip(std::size_t i) { bits_[i] ^= 1; }

  std::string to_binary() const;
  std::string to_hex() const;

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

// Structured view of a bit string. Masks are kept raw (possibly empty) so
// decode/encode is a bijection; see effective_* for the normalized sets.
struct Genome {
  CodecConfig config;
  ChannelMask channel_mask;
  VariableMask variable_mask;
  std::vector<BinaryOp> binary_ops;  // internal_count, heap order
  std::vector<UnaryOp> unary_ops;    // node_count, heap order
  std::vector<Leaf> leaves;          // leaf_count, left to right

  SearchSpace header() const { return {channel_mask, variable_mask}; }

  friend bool operator==(const Genome&, const Genome&) = default;
};

// Raw empty masks read as {x}.
ChannelMask effective_channels(const Genome& genome);
VariableMask effective_variables(const Genome& genome);

Genome decode(const BitString& bits, const CodecConfig& config);
BitString encode(const Genome& genome);

// Uniformly random operators and leaves; the header is set to `space`.
Genome random_genome(const CodecConfig& config, std::uint64_t seed,
                     const SearchSpace& space);

// Wire form helpers.
std::string genome_to_hex(const Genome& genome);
Genome genome_from_hex(std::string_view hex, const CodecConfig& config);

// Heap indexing helpers.
constexpr std::size_t left_child(std::size_t i) { return 2 * i + 1; }
constexpr std::size_t right_child(std::size_t i) { return 2 * i + 2; }

}  // namespace evoform

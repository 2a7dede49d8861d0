#include "evoform/codec.hpp"

#include <string>

#include "evoform/error.hpp"
#include "evoform/rng.hpp"

namespace evoform {

namespace {

constexpr char kAxisLetters[] = {'x', 'y', 'z', 't'};

class BitReader {
 public:
  explicit BitReader(const BitString& bits) : bits_(bits) {}

  unsigned read(int width) {
    unsigned v = 0;
    for (int i = 0; i < width; ++i) v = (v << 1) | (bits_[pos_++] ? 1u : 0u);
    return v;
  }

 private:
  const BitString& bits_;
  std::size_t pos_ = 0;
};

class BitWriter {
 public:
  explicit BitWriter(std::size_t size) : bits_(size) {}

  void write(unsigned value, int width) {
    for (int i = width - 1; i >= 0; --i) bits_.set(pos_++, (value >> i) & 1u);
  }

  BitString take() { return std::move(bits_); }

 private:
  BitString bits_;
  std::size_t pos_ = 0;
};

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

char axis_name(Axis axis) { return kAxisLetters[static_cast<int>(axis)]; }

template <int Width>
AxisMask<Width> AxisMask<Width>::parse(std::string_view letters) {
  std::uint8_t bits = 0;
  for (char c : letters) {
    if (c == ',' || c == ' ') continue;
    int idx = -1;
    for (int i = 0; i < Width; ++i) {
      if (kAxisLetters[i] == c) idx = i;
    }
    if (idx < 0) {
      throw Error(ErrorCode::kInvalidMask,
                  std::string("unknown axis letter '") + c + "'");
    }
    bits |= static_cast<std::uint8_t>(1u << idx);
  }
  return AxisMask(bits);
}

template <int Width>
std::vector<Axis> AxisMask<Width>::members() const {
  std::vector<Axis> out;
  for (int i = 0; i < Width; ++i) {
    if ((bits_ >> i) & 1u) out.push_back(static_cast<Axis>(i));
  }
  return out;
}

template <int Width>
std::string AxisMask<Width>::to_string() const {
  std::string out;
  for (int i = 0; i < Width; ++i) {
    if ((bits_ >> i) & 1u) out += kAxisLetters[i];
  }
  return out;
}

template class AxisMask<3>;
template class AxisMask<4>;

void SearchSpace::validate() const {
  if (channels.empty()) {
    throw Error(ErrorCode::kInvalidSpace, "channel mask is empty");
  }
  if (variables.empty()) {
    throw Error(ErrorCode::kInvalidSpace, "variable mask is empty");
  }
}

char binary_op_symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd:
      return '+';
    case BinaryOp::kSub:
      return '-';
    case BinaryOp::kMul:
      return '*';
    case BinaryOp::kDiv:
      return '/';
  }
  return '?';
}

const char* unary_op_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::kIdentity:
      return "id";
    case UnaryOp::kSin:
      return "sin";
    case UnaryOp::kCos:
      return "cos";
    case UnaryOp::kTan:
      return "tan";
  }
  return "?";
}

CodecConfig::CodecConfig(int depth) : depth_(depth) {
  if (depth < 1 || depth > kMaxDepth) {
    throw Error(ErrorCode::kInvalidArgument,
                "tree depth must be in [1, " + std::to_string(kMaxDepth) +
                    "], got " + std::to_string(depth));
  }
}

BitString BitString::from_binary(std::string_view zeros_and_ones) {
  BitString out;
  out.bits_.reserve(zeros_and_ones.size());
  for (char c : zeros_and_ones) {
    if (c == '0' || c == '1') {
      out.bits_.push_back(c == '1' ? 1 : 0);
    } else if (c != ' ' && c != '|' && c != '_') {
      throw Error(ErrorCode::kParse, std::string("bad bit character '") + c +
                                         "'");
    }
  }
  return out;
}

BitString BitString::from_hex(std::string_view hex, std::size_t bit_count) {
  const std::size_t digits = (bit_count + 3) / 4;
  if (hex.size() != digits) {
    throw Error(ErrorCode::kLength, "expected " + std::to_string(digits) +
                                        " hex digits, got " +
                                        std::to_string(hex.size()));
  }
  const std::size_t pad = digits * 4 - bit_count;
  BitString out(bit_count);
  for (std::size_t d = 0; d < digits; ++d) {
    const int v = hex_value(hex[d]);
    if (v < 0) {
      throw Error(ErrorCode::kParse,
                  std::string("bad hex digit '") + hex[d] + "'");
    }
    for (int b = 3; b >= 0; --b) {
      const std::size_t global = d * 4 + static_cast<std::size_t>(3 - b);
      const bool bit = (v >> b) & 1;
      if (global < pad) {
        if (bit) throw Error(ErrorCode::kLength, "nonzero padding bit");
        continue;
      }
      out.set(global - pad, bit);
    }
  }
  return out;
}

std::string BitString::to_binary() const {
  std::string out;
  out.reserve(bits_.size());
  for (auto b : bits_) out += b ? '1' : '0';
  return out;
}

std::string BitString::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t digits = (bits_.size() + 3) / 4;
  const std::size_t pad = digits * 4 - bits_.size();
  std::string out(digits, '0');
  for (std::size_t d = 0; d < digits; ++d) {
    int v = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const std::size_t global = d * 4 + k;
      v <<= 1;
      if (global >= pad && bits_[global - pad]) v |= 1;
    }
    out[d] = kDigits[v];
  }
  return out;
}

ChannelMask effective_channels(const Genome& genome) {
  return genome.channel_mask.empty() ? ChannelMask(1) : genome.channel_mask;
}

VariableMask effective_variables(const Genome& genome) {
  return genome.variable_mask.empty() ? VariableMask(1) : genome.variable_mask;
}

Genome decode(const BitString& bits, const CodecConfig& config) {
  if (bits.size() != config.total_bits()) {
    throw Error(ErrorCode::kLength,
                "genome needs " + std::to_string(config.total_bits()) +
                    " bits for depth " + std::to_string(config.depth()) +
                    ", got " + std::to_string(bits.size()));
  }
  BitReader in(bits);
  Genome g{config, {}, {}, {}, {}, {}};
  g.channel_mask = ChannelMask(static_cast<std::uint8_t>(in.read(3)));
  g.variable_mask = VariableMask(static_cast<std::uint8_t>(in.read(4)));
  g.binary_ops.resize(config.internal_count());
  for (auto& op : g.binary_ops) op = static_cast<BinaryOp>(in.read(2));
  g.unary_ops.resize(config.node_count());
  for (auto& op : g.unary_ops) op = static_cast<UnaryOp>(in.read(2));
  g.leaves.resize(config.leaf_count());
  for (auto& leaf : g.leaves) {
    leaf.kind = static_cast<std::uint8_t>(in.read(3));
    leaf.payload = static_cast<std::uint8_t>(in.read(8));
  }
  return g;
}

BitString encode(const Genome& genome) {
  const CodecConfig& c = genome.config;
  if (genome.binary_ops.size() != c.internal_count() ||
      genome.unary_ops.size() != c.node_count() ||
      genome.leaves.size() != c.leaf_count()) {
    throw Error(ErrorCode::kLength, "genome arrays do not match its config");
  }
  BitWriter out(c.total_bits());
  out.write(genome.channel_mask.bits(), 3);
  out.write(genome.variable_mask.bits(), 4);
  for (auto op : genome.binary_ops) out.write(static_cast<unsigned>(op), 2);
  for (auto op : genome.unary_ops) out.write(static_cast<unsigned>(op), 2);
  for (const auto& leaf : genome.leaves) {
    out.write(leaf.kind & 7u, 3);
    out.write(leaf.payload, 8);
  }
  return out.take();
}

Genome random_genome(const CodecConfig& config, std::uint64_t seed,
                     const SearchSpace& space) {
  space.validate();
  Rng rng(seed);
  BitString bits(config.total_bits());
  for (std::size_t i = CodecConfig::kHeaderBits; i < bits.size(); ++i) {
    bits.set(i, rng.bit());
  }
  Genome g = decode(bits, config);
  g.channel_mask = space.channels;
  g.variable_mask = space.variables;
  return g;
}

std::string genome_to_hex(const Genome& genome) {
  return encode(genome).to_hex();
}

Genome genome_from_hex(std::string_view hex, const CodecConfig& config) {
  return decode(BitString::from_hex(hex, config.total_bits()), config);
}

}  // namespace evoform

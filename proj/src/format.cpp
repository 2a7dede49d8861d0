#include "evoform/format.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

namespace evoform {

namespace {

// Extra digits printed beyond the target precision. The decision digit is
// exact for any double whose magnitude is above ~1e-12, far below the
// resolution anything here is printed at.
constexpr int kGuardDigits = 60;

}  // namespace

std::string format_fixed(double value, int digits) {
  if (!std::isfinite(value)) {
    return std::isnan(value) ? "nan" : (value > 0 ? "inf" : "-inf");
  }
  const bool negative = std::signbit(value);
  std::string wide(512, '\0');
  int n = std::snprintf(wide.data(), wide.size(), "%.*f", digits + kGuardDigits,
                        std::fabs(value));
  if (n >= static_cast<int>(wide.size())) {
    wide.resize(static_cast<std::size_t>(n) + 1);
    n = std::snprintf(wide.data(), wide.size(), "%.*f", digits + kGuardDigits,
                      std::fabs(value));
  }
  wide.resize(static_cast<std::size_t>(n));

  const std::size_t dot = wide.find('.');
  std::string kept = wide.substr(0, dot);
  kept += wide.substr(dot + 1, static_cast<std::size_t>(digits));
  const bool round_up = wide[dot + 1 + static_cast<std::size_t>(digits)] >= '5';

  if (round_up) {
    int i = static_cast<int>(kept.size()) - 1;
    for (; i >= 0; --i) {
      if (kept[static_cast<std::size_t>(i)] == '9') {
        kept[static_cast<std::size_t>(i)] = '0';
      } else {
        ++kept[static_cast<std::size_t>(i)];
        break;
      }
    }
    if (i < 0) kept.insert(kept.begin(), '1');
  }

  const std::size_t int_len = kept.size() - static_cast<std::size_t>(digits);
  std::string out = kept.substr(0, int_len);
  if (digits > 0) {
    out += '.';
    out += kept.substr(int_len);
  }
  if (negative && out.find_first_not_of("0.") != std::string::npos) {
    out.insert(out.begin(), '-');
  }
  return out;
}

std::string format_exact(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  (void)ec;
  return std::string(buf.data(), end);
}

}  // namespace evoform

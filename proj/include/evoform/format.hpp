#pragma once

#include <string>

namespace evoform {

// Fixed-point text with `digits` fractional digits, rounding ties away from
// zero. A result that rounds to zero is printed without a sign.
std::string format_fixed(double value, int digits);

// Shortest text that parses back to exactly `value`.
std::string format_exact(double value);

}  // namespace evoform

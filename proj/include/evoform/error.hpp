#pragma once

#include <stdexcept>
#include <string>

namespace evoform {

enum class ErrorCode {
  kLength,
  kInvalidSpace,
  kInvalidMask,
  kInvalidPick,
  kInvalidArgument,
  kMalformedMesh,
  kParse,
  kNotFound,
  kNotMember,
  kStaleDonor,
  kNotPermitted,
};

// Stable identifier used in structured error bodies, e.g. "stale-donor".
const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace evoform

#include "evoform/error.hpp"

namespace evoform {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kLength:
      return "length";
    case ErrorCode::kInvalidSpace:
      return "invalid-space";
    case ErrorCode::kInvalidMask:
      return "invalid-mask";
    case ErrorCode::kInvalidPick:
      return "invalid-pick";
    case ErrorCode::kInvalidArgument:
      return "invalid-argument";
    case ErrorCode::kMalformedMesh:
      return "malformed-mesh";
    case ErrorCode::kParse:
      return "parse";
    case ErrorCode::kNotFound:
      return "not-found";
    case ErrorCode::kNotMember:
      return "not-a-member";
    case ErrorCode::kStaleDonor:
      return "stale-donor";
    case ErrorCode::kNotPermitted:
      return "not-permitted";
  }
  return "unknown";
}

}  // namespace evoform

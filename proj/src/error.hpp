#pragma once

#include <stdexcept>
#include <string>

namespace biotrack {

// Mirrors bt_status in the C header; keep the numeric values in sync.
enum class ErrorCode {
  kUsage = 1,
  kNotFound = 2,
  kValidation = 3,
  kData = 4,
  kIo = 5,
  kRange = 6,
  kSequence = 7,
  kBusy = 8,
  kDegenerate = 9,
  kParse = 10,
  kVersion = 11,
  kInternal = 12,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUsage: return "usage";
    case ErrorCode::kNotFound: return "not-found";
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kData: return "data";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kRange: return "range";
    case ErrorCode::kSequence: return "sequencing";
    case ErrorCode::kBusy: return "busy";
    case ErrorCode::kDegenerate: return "degenerate";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kVersion: return "version";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

}  // namespace biotrack

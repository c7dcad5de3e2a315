#include "termforge/error.h"

namespace termforge {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kEmptyStore: return "empty-store";
    case ErrorCode::kNoContext: return "no-context";
    case ErrorCode::kInsufficientContext: return "insufficient-context";
    case ErrorCode::kDegenerateContext: return "degenerate-context";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kUndefinedScore: return "undefined-score";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kRetryable: return "retryable";
    case ErrorCode::kProtocol: return "protocol";
    case ErrorCode::kUniverseMismatch: return "universe-mismatch";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kMissingDependency: return "missing-dependency";
    case ErrorCode::kLocked: return "locked";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code) {}

}  // namespace termforge

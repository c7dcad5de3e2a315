#ifndef TERMFORGE_ERROR_H_
#define TERMFORGE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace termforge {

enum class ErrorCode {
  kIo,
  kEmptyStore,
  kNoContext,
  kInsufficientContext,
  kDegenerateContext,
  kDomain,
  kUndefinedScore,
  kFormat,
  kShape,
  kDivergence,
  kRetryable,
  kProtocol,
  kUniverseMismatch,
  kInvalidArgument,
  kConfig,
  kMissingDependency,
  kLocked,
};

std::string_view error_code_name(ErrorCode code);

// All library failures surface as this exception; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace termforge

#endif  // TERMFORGE_ERROR_H_

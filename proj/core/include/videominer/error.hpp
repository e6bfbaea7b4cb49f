// SPDX-License-Identifier: Apache-2.0

#ifndef VIDEOMINER_ERROR_HPP_
#define VIDEOMINER_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace videominer {

enum class ErrorCode {
  kMissingFile,
  kDecodeFailure,
  kResolutionMismatch,
  kEmptySequence,
  kTooFewFrames,
  kPrecondition,
  kLabelMismatch,
  kServiceError,
  kEmptyResponse,
  kDimensionMismatch,
  kExpansionDegenerate,
  kNoKeyframes,
  kZeroContinueReward,
  kEmptyGroup,
  kNonFiniteGradient,
  kSpecInvariantViolation,
  kMissingEmbedding,
  kParseError,
  kValidationError,
  kUsageError,
};

// Stable CamelCase name used in structured error output.
std::string_view to_string(ErrorCode code);

// All domain failures are reported with this exception type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::kPrecondition, message);
}

}  // namespace videominer

#endif  // VIDEOMINER_ERROR_HPP_

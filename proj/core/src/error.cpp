// SPDX-License-Identifier: Apache-2.0

#include "videominer/error.hpp"

namespace videominer {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMissingFile: return "MissingFile";
    case ErrorCode::kDecodeFailure: return "DecodeFailure";
    case ErrorCode::kResolutionMismatch: return "ResolutionMismatch";
    case ErrorCode::kEmptySequence: return "EmptySequence";
    case ErrorCode::kTooFewFrames: return "TooFewFrames";
    case ErrorCode::kPrecondition: return "PreconditionViolation";
    case ErrorCode::kLabelMismatch: return "LabelMismatch";
    case ErrorCode::kServiceError: return "ServiceError";
    case ErrorCode::kEmptyResponse: return "EmptyResponse";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kExpansionDegenerate: return "ExpansionDegenerate";
    case ErrorCode::kNoKeyframes: return "NoKeyframes";
    case ErrorCode::kZeroContinueReward: return "ZeroContinueReward";
    case ErrorCode::kEmptyGroup: return "EmptyGroup";
    case ErrorCode::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::kSpecInvariantViolation: return "SpecInvariantViolation";
    case ErrorCode::kMissingEmbedding: return "MissingEmbedding";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kUsageError: return "UsageError";
  }
  return "Unknown";
}

}  // namespace videominer

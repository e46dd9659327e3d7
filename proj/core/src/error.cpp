// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "scalelab/error.hpp"

#include <utility>

namespace scalelab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kDuplicateRun: return "DuplicateRun";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
    case ErrorCode::kNonFiniteObjective: return "NonFiniteObjective";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kAllInitsFailed: return "AllInitsFailed";
    case ErrorCode::kInvalidFit: return "InvalidFit";
    case ErrorCode::kDegenerateGrid: return "DegenerateGrid";
    case ErrorCode::kSingularRelation: return "SingularRelation";
    case ErrorCode::kEmptySeries: return "EmptySeries";
    case ErrorCode::kDegenerateSparsity: return "DegenerateSparsity";
    case ErrorCode::kEmptyExpert: return "EmptyExpert";
    case ErrorCode::kAllExpertsEmpty: return "AllExpertsEmpty";
    case ErrorCode::kZeroVariance: return "ZeroVariance";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kBootstrapFailed: return "BootstrapFailed";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string message, std::string subject)
    : std::runtime_error(std::move(message)), code_(code), subject_(std::move(subject)) {}

void raise(ErrorCode code, std::string message, std::string subject) {
  throw Error(code, std::move(message), std::move(subject));
}

}  // namespace scalelab

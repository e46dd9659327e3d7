// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scalelab {

enum class ErrorCode {
  kEmptyDataset,
  kDuplicateRun,
  kInvariantViolation,
  kNonFiniteObjective,
  kTooFewPoints,
  kAllInitsFailed,
  kInvalidFit,
  kDegenerateGrid,
  kSingularRelation,
  kEmptySeries,
  kDegenerateSparsity,
  kEmptyExpert,
  kAllExpertsEmpty,
  kZeroVariance,
  kParseError,
  kSchemaMismatch,
  kBootstrapFailed,
  kInvalidArgument,
  kIoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library. `subject()` names the offending field,
// flag, or row when one is known.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string subject = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorCode code_;
  std::string subject_;
};

[[noreturn]] void raise(ErrorCode code, std::string message, std::string subject = {});

// Throws kInvariantViolation naming `field` when `ok` is false.
inline void require(bool ok, const char* field, std::string_view what) {
  if (!ok) {
    raise(ErrorCode::kInvariantViolation, std::string(field) + ": " + std::string(what), field);
  }
}

}  // namespace scalelab

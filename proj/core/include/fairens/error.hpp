#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairens {

enum class ErrorCode {
  // dataset
  MissingColumn,
  UnparseableValue,
  EmptyFile,
  FileNotFound,
  InvalidSchema,
  InvalidDataset,
  NoSensitiveAttributes,
  DegenerateAttribute,
  TooFewRows,
  FingerprintMismatch,
  // metrics
  EmptyProfile,
  LengthMismatch,
  NonBinaryTask,
  ConstantVector,
  // ensemble
  AllZeroWeights,
  NoUsefulWeakLearner,
  InvalidModel,
  // bounds
  AsymmetricMatrix,
  ShapeMismatch,
  InvalidDelta,
  NegativeKL,
  NotADistribution,
  DivergentSupport,
  // pruning
  InvalidLambda,
  EmptySelector,
  // generic
  InvalidArgument,
  InvariantViolation,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Error thrown by every fallible operation in the library. The code is the
/// stable part; the message carries context (row, column, path, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// True for failures caused by bad input data rather than a broken invariant.
bool is_data_error(ErrorCode code) noexcept;

}  // namespace fairens

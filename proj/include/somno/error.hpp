#pragma once

#include <stdexcept>
#include <string>

namespace somno {

enum class ErrorCode {
  // EDF parsing
  TruncatedHeader,
  NonAsciiField,
  InconsistentHeaderBytes,
  UnknownChannel,
  TruncatedRecord,
  DegenerateCalibration,
  MalformedTal,
  UnknownStageLabel,
  OverlappingEvents,
  // preprocessing
  InvalidBand,
  TooShort,
  ZeroVariance,
  SamplingMismatch,
  // wavelet
  TooShortForLevels,
  InconsistentSubbands,
  EmptyScaleGrid,
  BandOutsideGrid,
  // features
  NonFiniteFeature,
  // selection
  DegenerateLabels,
  RankZero,
  DimensionMismatch,
  // models
  NonFiniteInput,
  ClassListMismatch,
  // evaluation
  TooFewSubjects,
  KTooLarge,
  EmptyInput,
  UnknownLabel,
  TooFewPairs,
  AllZeroDifferences,
  FoldMismatch,
  // io / orchestration
  ChecksumMismatch,
  NetworkFailure,
  BundleVersionMismatch,
  ConfigError,
  UsageError,
  IoError,
  Internal,
};

const char* error_code_name(ErrorCode code);

// Stable exit-code contract for the CLI: 1 usage/config, 2 data, 3 internal.
int error_exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace somno

#include "somno/error.hpp"

namespace somno {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::TruncatedHeader: return "TruncatedHeader";
    case ErrorCode::NonAsciiField: return "NonAsciiField";
    case ErrorCode::InconsistentHeaderBytes: return "InconsistentHeaderBytes";
    case ErrorCode::UnknownChannel: return "UnknownChannel";
    case ErrorCode::TruncatedRecord: return "TruncatedRecord";
    case ErrorCode::DegenerateCalibration: return "DegenerateCalibration";
    case ErrorCode::MalformedTal: return "MalformedTal";
    case ErrorCode::UnknownStageLabel: return "UnknownStageLabel";
    case ErrorCode::OverlappingEvents: return "OverlappingEvents";
    case ErrorCode::InvalidBand: return "InvalidBand";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::SamplingMismatch: return "SamplingMismatch";
    case ErrorCode::TooShortForLevels: return "TooShortForLevels";
    case ErrorCode::InconsistentSubbands: return "InconsistentSubbands";
    case ErrorCode::EmptyScaleGrid: return "EmptyScaleGrid";
    case ErrorCode::BandOutsideGrid: return "BandOutsideGrid";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::RankZero: return "RankZero";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::ClassListMismatch: return "ClassListMismatch";
    case ErrorCode::TooFewSubjects: return "TooFewSubjects";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::TooFewPairs: return "TooFewPairs";
    case ErrorCode::AllZeroDifferences: return "AllZeroDifferences";
    case ErrorCode::FoldMismatch: return "FoldMismatch";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::NetworkFailure: return "NetworkFailure";
    case ErrorCode::BundleVersionMismatch: return "BundleVersionMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::UsageError: return "UsageError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

int error_exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::UsageError:
      return 1;
    case ErrorCode::Internal:
      return 3;
    default:
      return 2;
  }
}

}  // namespace somno

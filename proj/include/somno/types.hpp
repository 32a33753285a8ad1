#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace somno {

// AASM stage taxonomy; R&K stages 3 and 4 both map to N3. Excluded covers
// unscored, unknown and movement epochs, which never reach the classifiers.
enum class SleepStage : std::uint8_t { Wake = 0, N1, N2, N3, Rem, Excluded };

inline constexpr std::array<SleepStage, 5> kScoredStages = {
    SleepStage::Wake, SleepStage::N1, SleepStage::N2, SleepStage::N3,
    SleepStage::Rem};

const char* stage_name(SleepStage stage);

// One channel of calibrated physical-unit samples (microvolts for EEG).
struct SignalTrace {
  std::string label;
  double fs = 0.0;  // Hz
  std::vector<double> samples;
};

inline constexpr int kEpochSeconds = 30;

struct Hypnogram {
  int epoch_len_s = kEpochSeconds;
  std::vector<SleepStage> stages;
  std::string source_id;
  // Number of annotation events whose onset or duration was not a whole
  // multiple of 30 s and had to be floored.
  std::size_t floored_events = 0;
};

// A 30 s EEG segment paired with its expert label. `samples` holds the
// z-score normalized signal once preprocessing completes; `raw_peak_uv` and
// `flat_fraction` carry the pre-normalization statistics the artifact policy
// is applied to.
struct EpochRecord {
  std::vector<double> samples;
  SleepStage stage = SleepStage::Excluded;
  std::string subject;
  std::string night;
  int epoch_index = 0;
  bool artifact = false;
  double raw_peak_uv = 0.0;
  double flat_fraction = 0.0;
  double fs = 0.0;
};

}  // namespace somno

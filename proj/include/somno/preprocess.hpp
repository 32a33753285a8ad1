#pragma once

#include <string>
#include <utility>
#include <vector>

#include "somno/filters.hpp"
#include "somno/types.hpp"

namespace somno {

struct ArtifactPolicy {
  double amplitude_limit_uv = 250.0;
  double max_flat_fraction = 0.9;
};

// Zero-phase band-pass; same length and sampling rate as the input.
SignalTrace bandpass_filter(const SignalTrace& trace, const FilterSpec& spec);

// Whole-recording z-score with the population standard deviation.
SignalTrace zscore_normalize(const SignalTrace& trace);

// Cuts the trace into 30 s epochs aligned with the hypnogram. Excluded-stage
// epochs are omitted but keep their absolute epoch index. Pre-normalization
// peak amplitude and flat-run fraction are recorded on every epoch.
std::vector<EpochRecord> segment_epochs(const SignalTrace& trace,
                                        const Hypnogram& hyp,
                                        const std::string& subject,
                                        const std::string& night = "1");

// An epoch is rejected iff its pre-normalization |peak| exceeds the amplitude
// limit or its flat-run fraction exceeds the policy maximum. Order preserved.
std::pair<std::vector<EpochRecord>, std::size_t> reject_artifacts(
    const std::vector<EpochRecord>& epochs, const ArtifactPolicy& policy);

// Keeps epochs from (first non-wake - margin) to (last non-wake + margin),
// clamped to the night. margin_epochs < 0 disables trimming; an all-wake
// night is returned unchanged.
std::vector<EpochRecord> trim_wake_margins(const std::vector<EpochRecord>& epochs,
                                           long margin_epochs);

struct PreprocessOptions {
  FilterSpec filter;
  ArtifactPolicy artifacts;
  long wake_margin_epochs = 60;  // "30 min of wake each side"; < 0 disables
};

struct PreprocessResult {
  std::vector<EpochRecord> epochs;  // filtered, trimmed, artifact-free, normalized
  std::size_t rejected_epochs = 0;
  std::size_t floored_events = 0;
  double recording_mean = 0.0;
  double recording_std = 0.0;
};

// filter -> segment -> trim wake margins -> reject artifacts -> normalize.
// Normalization statistics come from the whole filtered recording, while the
// artifact thresholds see the raw (pre-normalization) amplitudes.
PreprocessResult preprocess_recording(const SignalTrace& trace,
                                      const Hypnogram& hyp,
                                      const std::string& subject,
                                      const std::string& night,
                                      const PreprocessOptions& options);

}  // namespace somno

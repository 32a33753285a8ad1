#include "somno/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "somno/error.hpp"

namespace somno {

namespace {

std::pair<double, double> population_moments(const std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= double(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= double(x.size());
  return {mean, std::sqrt(var)};
}

}  // namespace

SignalTrace bandpass_filter(const SignalTrace& trace, const FilterSpec& spec) {
  const auto sections = design_butter_bandpass(spec, trace.fs);
  SignalTrace out;
  out.label = trace.label;
  out.fs = trace.fs;
  out.samples = sosfiltfilt(sections, trace.samples);
  return out;
}

SignalTrace zscore_normalize(const SignalTrace& trace) {
  if (trace.samples.empty()) raise(ErrorCode::TooShort, "empty trace");
  const auto [mean, stddev] = population_moments(trace.samples);
  if (stddev == 0.0)
    raise(ErrorCode::ZeroVariance, "constant recording cannot be normalized");
  SignalTrace out;
  out.label = trace.label;
  out.fs = trace.fs;
  out.samples.resize(trace.samples.size());
  for (std::size_t i = 0; i < trace.samples.size(); ++i)
    out.samples[i] = (trace.samples[i] - mean) / stddev;
  return out;
}

std::vector<EpochRecord> segment_epochs(const SignalTrace& trace,
                                        const Hypnogram& hyp,
                                        const std::string& subject,
                                        const std::string& night) {
  const double samples_per_epoch = trace.fs * kEpochSeconds;
  if (samples_per_epoch != std::floor(samples_per_epoch) || samples_per_epoch <= 0)
    raise(ErrorCode::SamplingMismatch,
          "30 s is not a whole number of samples at fs=" + std::to_string(trace.fs));
  const auto epoch_len = std::size_t(samples_per_epoch);

  const std::size_t by_trace = trace.samples.size() / epoch_len;
  const std::size_t count = std::min(by_trace, hyp.stages.size());

  std::vector<EpochRecord> epochs;
  epochs.reserve(count);
  for (std::size_t e = 0; e < count; ++e) {
    if (hyp.stages[e] == SleepStage::Excluded) continue;
    EpochRecord rec;
    rec.stage = hyp.stages[e];
    rec.subject = subject;
    rec.night = night;
    rec.epoch_index = int(e);
    rec.fs = trace.fs;
    const double* begin = trace.samples.data() + e * epoch_len;
    rec.samples.assign(begin, begin + epoch_len);
    double peak = 0.0;
    std::size_t flat_pairs = 0;
    for (std::size_t i = 0; i < epoch_len; ++i) {
      peak = std::max(peak, std::abs(rec.samples[i]));
      if (i > 0 && rec.samples[i] == rec.samples[i - 1]) ++flat_pairs;
    }
    rec.raw_peak_uv = peak;
    rec.flat_fraction = epoch_len > 1 ? double(flat_pairs) / double(epoch_len - 1) : 1.0;
    epochs.push_back(std::move(rec));
  }
  return epochs;
}

std::pair<std::vector<EpochRecord>, std::size_t> reject_artifacts(
    const std::vector<EpochRecord>& epochs, const ArtifactPolicy& policy) {
  std::vector<EpochRecord> kept;
  kept.reserve(epochs.size());
  std::size_t rejected = 0;
  for (const auto& e : epochs) {
    const bool bad = e.raw_peak_uv > policy.amplitude_limit_uv ||
                     e.flat_fraction > policy.max_flat_fraction;
    if (bad) {
      ++rejected;
      continue;
    }
    kept.push_back(e);
    kept.back().artifact = false;
  }
  return {std::move(kept), rejected};
}

std::vector<EpochRecord> trim_wake_margins(const std::vector<EpochRecord>& epochs,
                                           long margin_epochs) {
  if (margin_epochs < 0 || epochs.empty()) return epochs;
  std::size_t first = epochs.size(), last = 0;
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    if (epochs[i].stage != SleepStage::Wake) {
      if (first == epochs.size()) first = i;
      last = i;
    }
  }
  if (first == epochs.size()) return epochs;  // all-wake night
  const std::size_t lo = first > std::size_t(margin_epochs) ? first - std::size_t(margin_epochs) : 0;
  const std::size_t hi = std::min(epochs.size() - 1, last + std::size_t(margin_epochs));
  return std::vector<EpochRecord>(epochs.begin() + std::ptrdiff_t(lo),
                                  epochs.begin() + std::ptrdiff_t(hi + 1));
}

PreprocessResult preprocess_recording(const SignalTrace& trace,
                                      const Hypnogram& hyp,
                                      const std::string& subject,
                                      const std::string& night,
                                      const PreprocessOptions& options) {
  PreprocessResult result;
  result.floored_events = hyp.floored_events;

  const SignalTrace filtered = bandpass_filter(trace, options.filter);
  const auto [mean, stddev] = population_moments(filtered.samples);
  if (stddev == 0.0)
    raise(ErrorCode::ZeroVariance, "recording " + subject + "/" + night + " is constant");
  result.recording_mean = mean;
  result.recording_std = stddev;

  auto epochs = segment_epochs(filtered, hyp, subject, night);
  epochs = trim_wake_margins(epochs, options.wake_margin_epochs);
  auto [kept, rejected] = reject_artifacts(epochs, options.artifacts);
  result.rejected_epochs = rejected;

  for (auto& e : kept)
    for (double& v : e.samples) v = (v - mean) / stddev;
  result.epochs = std::move(kept);
  return result;
}

}  // namespace somno

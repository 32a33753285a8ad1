#pragma once

#include <span>
#include <string>
#include <vector>

#include "somno/types.hpp"
#include "somno/wavelet.hpp"

namespace somno {

struct BandDefinition {
  std::string name;
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

// delta 0.5-4, theta 4-8, alpha 8-13, beta 13-30 Hz.
const std::vector<BandDefinition>& canonical_bands();

struct WelchSpec {
  double segment_seconds = 4.0;
  double overlap = 0.5;  // fraction of the segment
};

// Welch PSD estimate (Hann window, constant detrend, density scaling,
// nfft = segment length so bins land on multiples of 1/segment_seconds).
std::vector<double> welch_psd(std::span<const double> x, double fs,
                              const WelchSpec& spec, std::vector<double>* freqs_hz);

// A group of named feature values; `degenerate` marks sentinel defaults
// produced for zero-variance input instead of NaN.
struct FeatureBlock {
  std::vector<std::string> names;
  std::vector<double> values;
  bool degenerate = false;
};

// variance, skewness, excess kurtosis, Hjorth activity/mobility/complexity.
FeatureBlock time_domain_features(const EpochRecord& epoch);

// 4 relative band powers (summing to 1) then 4 log absolute powers.
FeatureBlock band_power_features(const EpochRecord& epoch,
                                 const std::vector<BandDefinition>& bands);

// Per subband D1..D5, A5: log-energy, relative energy, variance, skewness,
// kurtosis; plus the global wavelet entropy of the relative energies.
FeatureBlock wavelet_band_features(const SubbandSet& subbands);

// Per band: mean, std and max of |W| over band rows x interior columns.
FeatureBlock scalogram_features(const Scalogram& scalogram,
                                const std::vector<BandDefinition>& bands);

struct FeatureOptions {
  bool dwt_block = true;
  bool cwt_block = true;
  std::vector<BandDefinition> bands = canonical_bands();
  WaveletSpec wavelet;
  std::size_t cwt_scales = 64;
  double cwt_lo_hz = 0.5;
  double cwt_hi_hz = 40.0;
  WelchSpec welch;
};

struct RowKey {
  std::string subject;
  std::string night;
  int epoch_index = 0;
  SleepStage stage = SleepStage::Excluded;
};

struct FeatureMatrix {
  std::vector<std::string> column_names;
  std::vector<RowKey> rows;
  std::vector<double> values;  // row-major

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return column_names.size(); }
  double at(std::size_t r, std::size_t c) const { return values[r * n_cols() + c]; }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * n_cols(), n_cols()};
  }
  std::vector<std::string> subject_groups() const;
};

// Full feature vector for one epoch in the fixed column order
// [time | band | dwt | cwt] (57 columns with every block enabled).
FeatureBlock compute_epoch_features(const EpochRecord& epoch,
                                    const FeatureOptions& options);

// Batch assembly; row order follows the input epoch order. Any non-finite
// value raises NonFiniteFeature naming the epoch and column.
FeatureMatrix assemble_features(const std::vector<EpochRecord>& epochs,
                                const FeatureOptions& options);

void write_features_csv(const FeatureMatrix& matrix,
                        const std::filesystem::path& path);

}  // namespace somno

#include "somno/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "somno/error.hpp"
#include "somno/fft.hpp"

namespace somno {

namespace {

constexpr double kLogFloor = 1e-30;

struct Moments {
  double mean = 0, variance = 0, skewness = 0, ex_kurtosis = 0;
  bool degenerate = false;
};

Moments central_moments(std::span<const double> x) {
  Moments m;
  if (x.empty()) {
    m.degenerate = true;
    return m;
  }
  for (double v : x) m.mean += v;
  m.mean /= double(x.size());
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double n = double(x.size());
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.variance = m2;
  if (m2 > 0) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.ex_kurtosis = m4 / (m2 * m2) - 3.0;
  } else {
    m.degenerate = true;
  }
  return m;
}

double population_variance(std::span<const double> x) {
  return central_moments(x).variance;
}

}  // namespace

const std::vector<BandDefinition>& canonical_bands() {
  static const std::vector<BandDefinition> bands = {
      {"delta", 0.5, 4.0}, {"theta", 4.0, 8.0}, {"alpha", 8.0, 13.0}, {"beta", 13.0, 30.0}};
  return bands;
}

std::vector<double> welch_psd(std::span<const double> x, double fs,
                              const WelchSpec& spec, std::vector<double>* freqs_hz) {
  if (x.empty()) raise(ErrorCode::TooShort, "empty signal for PSD");
  std::size_t seg = std::size_t(std::lround(spec.segment_seconds * fs));
  seg = std::min(seg, x.size());
  if (seg < 8) raise(ErrorCode::TooShort, "PSD segment shorter than 8 samples");
  const std::size_t hop = std::max<std::size_t>(1, std::size_t(std::lround(double(seg) * (1.0 - spec.overlap))));

  std::vector<double> window(seg);
  double win_sq = 0.0;
  for (std::size_t i = 0; i < seg; ++i) {
    window[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * double(i) / double(seg)));
    win_sq += window[i] * window[i];
  }

  const std::size_t n_bins = seg / 2 + 1;
  std::vector<double> psd(n_bins, 0.0);
  std::vector<double> buf(seg);
  std::size_t n_segments = 0;
  for (std::size_t start = 0; start + seg <= x.size(); start += hop) {
    double mean = 0.0;
    for (std::size_t i = 0; i < seg; ++i) mean += x[start + i];
    mean /= double(seg);
    for (std::size_t i = 0; i < seg; ++i) buf[i] = (x[start + i] - mean) * window[i];
    const auto spectrum = fft_real(buf, seg);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double mag2 = std::norm(spectrum[k]);
      const bool interior = k != 0 && !(seg % 2 == 0 && k == seg / 2);
      psd[k] += (interior ? 2.0 : 1.0) * mag2;
    }
    ++n_segments;
  }
  const double scale = 1.0 / (fs * win_sq * double(n_segments));
  for (double& v : psd) v *= scale;

  if (freqs_hz) {
    freqs_hz->resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k) (*freqs_hz)[k] = double(k) * fs / double(seg);
  }
  return psd;
}

FeatureBlock time_domain_features(const EpochRecord& epoch) {
  FeatureBlock out;
  out.names = {"time_variance",    "time_skewness",     "time_kurtosis",
               "hjorth_activity",  "hjorth_mobility",   "hjorth_complexity"};
  const auto& x = epoch.samples;
  const Moments m = central_moments(x);

  std::vector<double> d1, d2;
  d1.reserve(x.size() > 0 ? x.size() - 1 : 0);
  for (std::size_t i = 1; i < x.size(); ++i) d1.push_back(x[i] - x[i - 1]);
  for (std::size_t i = 1; i < d1.size(); ++i) d2.push_back(d1[i] - d1[i - 1]);

  double mobility = 0.0, complexity = 0.0;
  if (m.variance > 0) {
    const double var_d1 = population_variance(d1);
    mobility = std::sqrt(var_d1 / m.variance);
    if (var_d1 > 0) {
      const double mobility_d1 = std::sqrt(population_variance(d2) / var_d1);
      complexity = mobility > 0 ? mobility_d1 / mobility : 0.0;
    }
  }
  out.values = {m.variance, m.degenerate ? 0.0 : m.skewness,
                m.degenerate ? 0.0 : m.ex_kurtosis, m.variance, mobility, complexity};
  out.degenerate = m.degenerate;
  return out;
}

FeatureBlock band_power_features(const EpochRecord& epoch,
                                 const std::vector<BandDefinition>& bands) {
  FeatureBlock out;
  double max_edge = 0.0;
  for (const auto& b : bands) max_edge = std::max(max_edge, b.hi_hz);
  if (epoch.fs <= 2.0 * max_edge)
    raise(ErrorCode::InvalidBand, "sampling rate too low for requested bands");

  std::vector<double> freqs;
  const auto psd = welch_psd(epoch.samples, epoch.fs, WelchSpec{}, &freqs);
  const double df = freqs.size() > 1 ? freqs[1] - freqs[0] : 1.0;

  std::vector<double> powers(bands.size(), 0.0);
  for (std::size_t k = 0; k < psd.size(); ++k) {
    for (std::size_t b = 0; b < bands.size(); ++b) {
      if (freqs[k] >= bands[b].lo_hz && freqs[k] < bands[b].hi_hz)
        powers[b] += psd[k] * df;
    }
  }
  double total = 0.0;
  for (double p : powers) total += p;

  for (const auto& b : bands) out.names.push_back("bp_rel_" + b.name);
  for (const auto& b : bands) out.names.push_back("bp_log_" + b.name);
  if (total > 0) {
    for (double p : powers) out.values.push_back(p / total);
  } else {
    out.degenerate = true;
    for (std::size_t b = 0; b < bands.size(); ++b)
      out.values.push_back(1.0 / double(bands.size()));
  }
  for (double p : powers) out.values.push_back(std::log(p + kLogFloor));
  return out;
}

FeatureBlock wavelet_band_features(const SubbandSet& subbands) {
  FeatureBlock out;
  std::vector<std::pair<std::string, std::span<const double>>> blocks;
  for (std::size_t k = 0; k < subbands.details.size(); ++k)
    blocks.emplace_back("d" + std::to_string(k + 1), subbands.details[k]);
  blocks.emplace_back("a" + std::to_string(subbands.details.size()), subbands.approx);

  std::vector<double> energies(blocks.size(), 0.0);
  double total = 0.0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (double c : blocks[b].second) energies[b] += c * c;
    total += energies[b];
  }

  std::vector<double> rel(blocks.size());
  if (total > 0) {
    for (std::size_t b = 0; b < blocks.size(); ++b) rel[b] = energies[b] / total;
  } else {
    out.degenerate = true;
    std::fill(rel.begin(), rel.end(), 1.0 / double(blocks.size()));
  }

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& tag = blocks[b].first;
    const Moments m = central_moments(blocks[b].second);
    out.names.push_back("dwt_" + tag + "_log_energy");
    out.values.push_back(std::log(energies[b] + kLogFloor));
    out.names.push_back("dwt_" + tag + "_rel_energy");
    out.values.push_back(rel[b]);
    out.names.push_back("dwt_" + tag + "_variance");
    out.values.push_back(m.variance);
    out.names.push_back("dwt_" + tag + "_skewness");
    out.values.push_back(m.degenerate ? 0.0 : m.skewness);
    out.names.push_back("dwt_" + tag + "_kurtosis");
    out.values.push_back(m.degenerate ? 0.0 : m.ex_kurtosis);
  }

  double entropy = 0.0;
  for (double e : rel)
    if (e > 0) entropy -= e * std::log(e);
  out.names.push_back("dwt_entropy");
  out.values.push_back(entropy);
  return out;
}

FeatureBlock scalogram_features(const Scalogram& s,
                                const std::vector<BandDefinition>& bands) {
  FeatureBlock out;
  const auto freqs = scale_frequency_map(s.grid);
  const double f_max = *std::max_element(freqs.begin(), freqs.end());
  const double f_min = *std::min_element(freqs.begin(), freqs.end());

  // Exclude the edge columns dominated by the widest wavelet's support.
  const double a_max = s.grid.scales.back();
  std::size_t edge = std::size_t(std::ceil(M_SQRT2 * a_max));
  edge = std::min(edge, s.n_time > 3 ? (s.n_time - 1) / 3 : 0);
  const std::size_t t0 = edge, t1 = s.n_time - edge;

  for (const auto& band : bands) {
    if (band.lo_hz < f_min - 1e-9 || band.hi_hz > f_max + 1e-9)
      raise(ErrorCode::BandOutsideGrid,
            band.name + " [" + std::to_string(band.lo_hz) + ", " +
                std::to_string(band.hi_hz) + "] not covered by the scale grid");
    double sum = 0.0, sum_sq = 0.0, peak = 0.0;
    std::size_t count = 0;
    for (std::size_t si = 0; si < freqs.size(); ++si) {
      if (freqs[si] < band.lo_hz || freqs[si] >= band.hi_hz) continue;
      for (std::size_t t = t0; t < t1; ++t) {
        const double v = s.at(si, t);
        sum += v;
        sum_sq += v * v;
        peak = std::max(peak, v);
        ++count;
      }
    }
    if (count == 0)
      raise(ErrorCode::BandOutsideGrid, "no scales map into band " + band.name);
    const double mean = sum / double(count);
    const double var = std::max(0.0, sum_sq / double(count) - mean * mean);
    out.names.push_back("cwt_" + band.name + "_mean");
    out.values.push_back(mean);
    out.names.push_back("cwt_" + band.name + "_std");
    out.values.push_back(std::sqrt(var));
    out.names.push_back("cwt_" + band.name + "_max");
    out.values.push_back(peak);
  }
  return out;
}

std::vector<std::string> FeatureMatrix::subject_groups() const {
  std::vector<std::string> out;
  for (const auto& r : rows)
    if (std::find(out.begin(), out.end(), r.subject) == out.end())
      out.push_back(r.subject);
  return out;
}

FeatureBlock compute_epoch_features(const EpochRecord& epoch,
                                    const FeatureOptions& options) {
  FeatureBlock all = time_domain_features(epoch);

  FeatureBlock band = band_power_features(epoch, options.bands);
  all.names.insert(all.names.end(), band.names.begin(), band.names.end());
  all.values.insert(all.values.end(), band.values.begin(), band.values.end());
  all.degenerate = all.degenerate || band.degenerate;

  if (options.dwt_block) {
    const SubbandSet subbands = dwt_multilevel(epoch.samples, options.wavelet);
    FeatureBlock dwt = wavelet_band_features(subbands);
    all.names.insert(all.names.end(), dwt.names.begin(), dwt.names.end());
    all.values.insert(all.values.end(), dwt.values.begin(), dwt.values.end());
    all.degenerate = all.degenerate || dwt.degenerate;
  }
  if (options.cwt_block) {
    const ScaleGrid grid = make_scale_grid(options.cwt_lo_hz, options.cwt_hi_hz,
                                           options.cwt_scales, epoch.fs);
    const Scalogram scal = cwt_scalogram(epoch.samples, grid);
    FeatureBlock cwt = scalogram_features(scal, options.bands);
    all.names.insert(all.names.end(), cwt.names.begin(), cwt.names.end());
    all.values.insert(all.values.end(), cwt.values.begin(), cwt.values.end());
  }
  return all;
}

FeatureMatrix assemble_features(const std::vector<EpochRecord>& epochs,
                                const FeatureOptions& options) {
  FeatureMatrix matrix;
  if (epochs.empty()) return matrix;

  matrix.column_names = compute_epoch_features(epochs.front(), options).names;
  const std::size_t n_cols = matrix.column_names.size();
  matrix.values.assign(epochs.size() * n_cols, 0.0);
  matrix.rows.resize(epochs.size());

  // Each epoch writes a disjoint row, so the result is independent of the
  // thread schedule.
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(epochs.size()); ++i) {
    const auto& e = epochs[std::size_t(i)];
    const FeatureBlock block = compute_epoch_features(e, options);
    std::copy(block.values.begin(), block.values.end(),
              matrix.values.begin() + i * std::ptrdiff_t(n_cols));
    matrix.rows[std::size_t(i)] = {e.subject, e.night, e.epoch_index, e.stage};
  }

  for (std::size_t r = 0; r < matrix.n_rows(); ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (!std::isfinite(matrix.at(r, c))) {
        const auto& key = matrix.rows[r];
        raise(ErrorCode::NonFiniteFeature,
              "column '" + matrix.column_names[c] + "' for epoch " + key.subject +
                  "/" + key.night + "#" + std::to_string(key.epoch_index));
      }
    }
  }
  return matrix;
}

void write_features_csv(const FeatureMatrix& matrix,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
  out << "subject,night,epoch,stage";
  for (const auto& name : matrix.column_names) out << ',' << name;
  out << '\n';
  out.precision(17);
  for (std::size_t r = 0; r < matrix.n_rows(); ++r) {
    const auto& key = matrix.rows[r];
    out << key.subject << ',' << key.night << ',' << key.epoch_index << ','
        << stage_name(key.stage);
    for (std::size_t c = 0; c < matrix.n_cols(); ++c) out << ',' << matrix.at(r, c);
    out << '\n';
  }
}

}  // namespace somno

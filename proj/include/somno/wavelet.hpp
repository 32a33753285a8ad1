#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace somno {

// Orthonormal db4 analysis filter pair. The low-pass taps come from the
// Daubechies spectral factorization (4 vanishing moments, minimum phase);
// the high-pass is its quadrature mirror.
const std::array<double, 8>& db4_lowpass();
const std::array<double, 8>& db4_highpass();

struct WaveletSpec {
  int taps = 8;    // db4
  int levels = 5;
};

// Multilevel decomposition with periodic boundary handling. The signal is
// periodized to the next multiple of 2^levels, so coefficient energy equals
// padded-signal energy exactly and reconstruction is exact after truncation.
struct SubbandSet {
  std::vector<double> approx;                // A_L
  std::vector<std::vector<double>> details;  // details[k] = D_{k+1}
  std::size_t original_length = 0;
  std::size_t padded_length = 0;
  WaveletSpec spec;
};

SubbandSet dwt_multilevel(std::span<const double> x, const WaveletSpec& spec);
std::vector<double> idwt_multilevel(const SubbandSet& subbands);

// Morlet scale grid, scales in sample units. Pseudo-frequency convention:
//   f(a) = (omega0 / 2*pi) * fs / a
struct ScaleGrid {
  std::vector<double> scales;  // strictly increasing
  double omega0 = 6.0;
  double fs = 0.0;
};

ScaleGrid make_scale_grid(double lo_hz, double hi_hz, std::size_t count,
                          double fs, double omega0 = 6.0);
std::vector<double> scale_frequency_map(const ScaleGrid& grid);
double scale_to_frequency(double scale, double fs, double omega0 = 6.0);
double frequency_to_scale(double f_hz, double fs, double omega0 = 6.0);

struct Scalogram {
  std::vector<double> magnitudes;  // row-major, scales x time
  ScaleGrid grid;
  std::size_t n_time = 0;

  double at(std::size_t scale, std::size_t t) const {
    return magnitudes[scale * n_time + t];
  }
};

// |CWT| with an L2-normalized complex Morlet mother wavelet, computed by
// frequency-domain convolution per scale on a zero-padded power-of-two grid.
Scalogram cwt_scalogram(std::span<const double> x, const ScaleGrid& grid);

void write_scalogram_csv(const Scalogram& s, const std::filesystem::path& path);
void write_scalogram_pgm(const Scalogram& s, const std::filesystem::path& path);

}  // namespace somno

#include "somno/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>

#include "somno/error.hpp"
#include "somno/fft.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace somno {

const std::array<double, 8>& db4_lowpass() {
  static const std::array<double, 8> h = {
      0.23037781330885523,  0.71484657055254150,  0.63088076792959040,
      -0.02798376941698385, -0.18703481171888114, 0.03084138183598697,
      0.03288301166698295,  -0.01059740178499728};
  return h;
}

const std::array<double, 8>& db4_highpass() {
  static const std::array<double, 8> g = [] {
    const auto& h = db4_lowpass();
    std::array<double, 8> out{};
    for (std::size_t k = 0; k < 8; ++k)
      out[k] = (k % 2 == 0 ? 1.0 : -1.0) * h[7 - k];
    return out;
  }();
  return g;
}

namespace {

void analysis_step(std::span<const double> in, std::vector<double>& approx,
                   std::vector<double>& detail) {
  const auto& h = db4_lowpass();
  const auto& g = db4_highpass();
  const std::size_t m = in.size();
  const std::size_t half = m / 2;
  approx.resize(half);
  detail.resize(half);
  for (std::size_t i = 0; i < half; ++i) {
    double a = 0.0, d = 0.0;
    for (std::size_t k = 0; k < 8; ++k) {
      const double v = in[(2 * i + k) % m];
      a += h[k] * v;
      d += g[k] * v;
    }
    approx[i] = a;
    detail[i] = d;
  }
}

void synthesis_step(std::span<const double> approx, std::span<const double> detail,
                    std::vector<double>& out) {
  const auto& h = db4_lowpass();
  const auto& g = db4_highpass();
  const std::size_t half = approx.size();
  const std::size_t m = 2 * half;
  out.assign(m, 0.0);
  for (std::size_t i = 0; i < half; ++i) {
    for (std::size_t k = 0; k < 8; ++k) {
      out[(2 * i + k) % m] += h[k] * approx[i] + g[k] * detail[i];
    }
  }
}

}  // namespace

SubbandSet dwt_multilevel(std::span<const double> x, const WaveletSpec& spec) {
  if (x.empty()) raise(ErrorCode::TooShortForLevels, "empty signal");
  if (spec.levels < 1) raise(ErrorCode::TooShortForLevels, "levels must be >= 1");
  const std::size_t block = std::size_t(1) << spec.levels;
  if (x.size() < block)
    raise(ErrorCode::TooShortForLevels,
          "signal of length " + std::to_string(x.size()) + " cannot support level " +
              std::to_string(spec.levels));

  SubbandSet out;
  out.spec = spec;
  out.original_length = x.size();
  out.padded_length = (x.size() + block - 1) / block * block;

  std::vector<double> current(out.padded_length);
  for (std::size_t i = 0; i < out.padded_length; ++i) current[i] = x[i % x.size()];

  out.details.resize(std::size_t(spec.levels));
  std::vector<double> approx;
  for (int level = 0; level < spec.levels; ++level) {
    analysis_step(current, approx, out.details[std::size_t(level)]);
    current.swap(approx);
  }
  out.approx = std::move(current);
  return out;
}

std::vector<double> idwt_multilevel(const SubbandSet& s) {
  const int levels = s.spec.levels;
  if (int(s.details.size()) != levels || s.approx.empty())
    raise(ErrorCode::InconsistentSubbands, "subband count does not match levels");
  std::size_t expect = s.padded_length;
  for (int level = 0; level < levels; ++level) {
    expect /= 2;
    if (s.details[std::size_t(level)].size() != expect)
      raise(ErrorCode::InconsistentSubbands,
            "D" + std::to_string(level + 1) + " has wrong length");
  }
  if (s.approx.size() != expect || s.original_length > s.padded_length)
    raise(ErrorCode::InconsistentSubbands, "approximation length mismatch");

  std::vector<double> current(s.approx.begin(), s.approx.end());
  std::vector<double> next;
  for (int level = levels - 1; level >= 0; --level) {
    synthesis_step(current, s.details[std::size_t(level)], next);
    current.swap(next);
  }
  current.resize(s.original_length);
  return current;
}

ScaleGrid make_scale_grid(double lo_hz, double hi_hz, std::size_t count,
                          double fs, double omega0) {
  if (count < 2 || !(lo_hz > 0.0) || !(lo_hz < hi_hz))
    raise(ErrorCode::EmptyScaleGrid, "invalid scale grid request");
  ScaleGrid grid;
  grid.omega0 = omega0;
  grid.fs = fs;
  const double a_min = frequency_to_scale(hi_hz, fs, omega0);
  const double a_max = frequency_to_scale(lo_hz, fs, omega0);
  const double step = std::log(a_max / a_min) / double(count - 1);
  grid.scales.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    grid.scales[i] = a_min * std::exp(step * double(i));
  return grid;
}

double scale_to_frequency(double scale, double fs, double omega0) {
  return omega0 / (2.0 * M_PI) * fs / scale;
}

double frequency_to_scale(double f_hz, double fs, double omega0) {
  return omega0 / (2.0 * M_PI) * fs / f_hz;
}

std::vector<double> scale_frequency_map(const ScaleGrid& grid) {
  std::vector<double> freqs(grid.scales.size());
  for (std::size_t i = 0; i < grid.scales.size(); ++i)
    freqs[i] = scale_to_frequency(grid.scales[i], grid.fs, grid.omega0);
  return freqs;
}

Scalogram cwt_scalogram(std::span<const double> x, const ScaleGrid& grid) {
  if (grid.scales.empty()) raise(ErrorCode::EmptyScaleGrid, "scale grid is empty");
  if (x.empty()) raise(ErrorCode::EmptyScaleGrid, "empty signal");

  const std::size_t n = x.size();
  const std::size_t nfft = next_pow2(n);
  const auto spectrum = fft_real(x, nfft);

  Scalogram out;
  out.grid = grid;
  out.n_time = n;
  out.magnitudes.assign(grid.scales.size() * n, 0.0);

  const double norm = std::pow(M_PI, -0.25);
  const std::size_t half = nfft / 2;

#pragma omp parallel
  {
    std::vector<std::complex<double>> row(nfft);
#pragma omp for schedule(static)
    for (std::ptrdiff_t si = 0; si < std::ptrdiff_t(grid.scales.size()); ++si) {
      const double a = grid.scales[std::size_t(si)];
      const double amp = norm * std::sqrt(2.0 * M_PI * a);
      std::fill(row.begin(), row.end(), std::complex<double>(0.0, 0.0));
      // analytic wavelet: positive frequencies only
      for (std::size_t k = 1; k <= half; ++k) {
        const double w = 2.0 * M_PI * double(k) / double(nfft);
        const double arg = a * w - grid.omega0;
        row[k] = spectrum[k] * (amp * std::exp(-0.5 * arg * arg));
      }
      fft_inplace(row, true);
      double* dst = out.magnitudes.data() + std::size_t(si) * n;
      for (std::size_t t = 0; t < n; ++t) dst[t] = std::abs(row[t]);
    }
  }
  return out;
}

void write_scalogram_csv(const Scalogram& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
  out << "time";
  for (double a : s.grid.scales) out << ',' << a;
  out << '\n';
  for (std::size_t t = 0; t < s.n_time; ++t) {
    out << t;
    for (std::size_t si = 0; si < s.grid.scales.size(); ++si)
      out << ',' << s.at(si, t);
    out << '\n';
  }
}

void write_scalogram_pgm(const Scalogram& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
  const std::size_t rows = s.grid.scales.size();
  const std::size_t cols = s.n_time;
  double peak = 0.0;
  for (double v : s.magnitudes) peak = std::max(peak, v);
  out << "P5\n" << cols << ' ' << rows << "\n255\n";
  std::vector<unsigned char> line(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = peak > 0 ? s.at(r, c) / peak : 0.0;
      line[c] = static_cast<unsigned char>(std::lround(255.0 * v));
    }
    out.write(reinterpret_cast<const char*>(line.data()), std::streamsize(cols));
  }
}

}  // namespace somno

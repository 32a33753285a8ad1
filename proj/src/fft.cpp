#include "somno/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

#include "somno/error.hpp"

namespace somno {

namespace {

// FFTW planning is not thread-safe; execution via fftw_execute_dft is.
std::mutex plan_mutex;

fftw_plan plan_for(std::size_t n, int sign) {
  static std::map<std::pair<std::size_t, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  const auto key = std::make_pair(n, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<std::complex<double>> scratch(n);
  auto* raw = reinterpret_cast<fftw_complex*>(scratch.data());
  fftw_plan plan = fftw_plan_dft_1d(int(n), raw, raw, sign,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache.emplace(key, plan);
  return plan;
}

}  // namespace

void fft_inplace(std::vector<std::complex<double>>& data, bool inverse) {
  if (data.empty()) raise(ErrorCode::Internal, "fft of empty buffer");
  const int sign = inverse ? FFTW_BACKWARD : FFTW_FORWARD;
  fftw_plan plan = plan_for(data.size(), sign);
  auto* raw = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, raw, raw);
  if (inverse) {
    const double scale = 1.0 / double(data.size());
    for (auto& v : data) v *= scale;
  }
}

std::vector<std::complex<double>> fft_real(std::span<const double> x, std::size_t nfft) {
  std::vector<std::complex<double>> data(nfft);
  const std::size_t take = std::min(nfft, x.size());
  for (std::size_t i = 0; i < take; ++i) data[i] = x[i];
  fft_inplace(data, false);
  return data;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace somno

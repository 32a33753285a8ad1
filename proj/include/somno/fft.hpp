#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace somno {

// Thin FFTW3 front end. Plans are cached per (size, direction) behind a
// mutex and created with FFTW_UNALIGNED so execution can run on arbitrary
// caller buffers from any thread.
void fft_inplace(std::vector<std::complex<double>>& data, bool inverse);

// Forward FFT of a real signal zero-padded (or truncated) to nfft.
std::vector<std::complex<double>> fft_real(std::span<const double> x, std::size_t nfft);

std::size_t next_pow2(std::size_t n);

}  // namespace somno

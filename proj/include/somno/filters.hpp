#pragma once

#include <span>
#include <vector>

#include "somno/types.hpp"

namespace somno {

struct FilterSpec {
  double low_hz = 0.5;
  double high_hz = 40.0;
  int order = 4;  // analog prototype order; the digital band-pass has 2x poles
};

// One second-order section, direct form II transposed, a0 normalized to 1.
struct Biquad {
  double b0 = 0, b1 = 0, b2 = 0;
  double a1 = 0, a2 = 0;
};

// Butterworth band-pass designed via the bilinear transform with pre-warped
// edges, returned as cascaded biquads (overall gain folded into the first).
std::vector<Biquad> design_butter_bandpass(const FilterSpec& spec, double fs);

// Magnitude response of the cascade at frequency f (Hz).
double sos_response(const std::vector<Biquad>& sections, double f, double fs);

// Zero-phase forward-backward filtering with odd-reflection padding and
// steady-state initial conditions, so step inputs produce no start-up
// transient. Padding length is 3x the equivalent tap count.
std::vector<double> sosfiltfilt(const std::vector<Biquad>& sections,
                                std::span<const double> x);

}  // namespace somno

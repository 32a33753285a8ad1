#include "somno/filters.hpp"

#include <cmath>
#include <complex>

#include "somno/error.hpp"

namespace somno {

namespace {

using cplx = std::complex<double>;

void sosfilt_inplace(const std::vector<Biquad>& sections, std::vector<double>& x,
                     const std::vector<std::array<double, 2>>& zi) {
  for (std::size_t s = 0; s < sections.size(); ++s) {
    const Biquad& q = sections[s];
    double s1 = zi[s][0], s2 = zi[s][1];
    for (double& v : x) {
      const double in = v;
      const double out = q.b0 * in + s1;
      s1 = q.b1 * in - q.a1 * out + s2;
      s2 = q.b2 * in - q.a2 * out;
      v = out;
    }
  }
}

// Steady-state unit-input state per section, scaled by the DC gain of the
// sections before it; multiplied by the first input sample this removes the
// step transient at the start of each pass.
std::vector<std::array<double, 2>> steady_state(const std::vector<Biquad>& sections,
                                                double x0) {
  std::vector<std::array<double, 2>> zi(sections.size());
  double scale = x0;
  for (std::size_t s = 0; s < sections.size(); ++s) {
    const Biquad& q = sections[s];
    const double denom = 1.0 + q.a1 + q.a2;
    const double y = denom != 0.0 ? (q.b0 + q.b1 + q.b2) / denom : 0.0;
    zi[s][0] = scale * (y - q.b0);
    zi[s][1] = scale * (q.b2 - q.a2 * y);
    scale *= y;
  }
  return zi;
}

}  // namespace

std::vector<Biquad> design_butter_bandpass(const FilterSpec& spec, double fs) {
  if (!(spec.low_hz > 0.0) || !(spec.low_hz < spec.high_hz) ||
      !(spec.high_hz < fs / 2.0))
    raise(ErrorCode::InvalidBand,
          "band [" + std::to_string(spec.low_hz) + ", " + std::to_string(spec.high_hz) +
              "] Hz invalid at fs=" + std::to_string(fs));
  if (spec.order < 1 || spec.order > 12)
    raise(ErrorCode::InvalidBand, "unsupported filter order " + std::to_string(spec.order));

  const int n = spec.order;
  // Pre-warped analog edges (rad/s) for the bilinear transform.
  const double wl = 2.0 * fs * std::tan(M_PI * spec.low_hz / fs);
  const double wh = 2.0 * fs * std::tan(M_PI * spec.high_hz / fs);
  const double bw = wh - wl;
  const double w0_sq = wl * wh;

  // Low-pass prototype poles on the unit circle, left half plane.
  std::vector<cplx> analog_poles;
  analog_poles.reserve(std::size_t(2) * n);
  for (int k = 0; k < n; ++k) {
    const double theta = M_PI * (2.0 * k + n + 1.0) / (2.0 * n);
    const cplx p(std::cos(theta), std::sin(theta));
    // lp2bp: each prototype pole splits into a pair.
    const cplx scaled = p * (bw / 2.0);
    const cplx root = std::sqrt(scaled * scaled - w0_sq);
    analog_poles.push_back(scaled + root);
    analog_poles.push_back(scaled - root);
  }
  // n analog zeros at s = 0; gain bw^n keeps unity passband gain.

  const double fs2 = 2.0 * fs;
  std::vector<cplx> digital_poles;
  digital_poles.reserve(analog_poles.size());
  cplx pole_prod(1.0, 0.0);
  for (const cplx& p : analog_poles) {
    digital_poles.push_back((fs2 + p) / (fs2 - p));
    pole_prod *= (fs2 - p);
  }
  // Analog zeros at 0 map to z=+1; the n zeros at infinity map to z=-1.
  const double zero_prod = std::pow(fs2, n);
  const double gain = std::pow(bw, n) * (zero_prod / pole_prod).real();

  // Poles arrive in conjugate pairs (indices 2k, 2k+1 after lp2bp of a
  // conjugate-symmetric prototype)? Not necessarily adjacent; pair greedily.
  std::vector<cplx> remaining = digital_poles;
  std::vector<Biquad> sections;
  while (!remaining.empty()) {
    const cplx p = remaining.back();
    remaining.pop_back();
    // find its conjugate partner
    std::size_t best = remaining.size();
    double best_dist = 1e30;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      const double d = std::abs(remaining[i] - std::conj(p));
      if (d < best_dist) {
        best_dist = d;
        best = i;
      }
    }
    cplx q;
    if (best < remaining.size()) {
      q = remaining[best];
      remaining.erase(remaining.begin() + std::ptrdiff_t(best));
    } else {
      q = std::conj(p);
    }
    Biquad biq;
    biq.b0 = 1.0;
    biq.b1 = 0.0;
    biq.b2 = -1.0;  // zeros at +1 and -1: (1 - z^-2)
    biq.a1 = -(p + q).real();
    biq.a2 = (p * q).real();
    sections.push_back(biq);
  }
  sections.front().b0 *= gain;
  sections.front().b1 *= gain;
  sections.front().b2 *= gain;
  return sections;
}

double sos_response(const std::vector<Biquad>& sections, double f, double fs) {
  const double w = 2.0 * M_PI * f / fs;
  const cplx z1 = std::polar(1.0, -w);
  const cplx z2 = z1 * z1;
  cplx h(1.0, 0.0);
  for (const Biquad& q : sections)
    h *= (q.b0 + q.b1 * z1 + q.b2 * z2) / (1.0 + q.a1 * z1 + q.a2 * z2);
  return std::abs(h);
}

std::vector<double> sosfiltfilt(const std::vector<Biquad>& sections,
                                std::span<const double> x) {
  const std::size_t taps = 2 * sections.size() + 1;
  const std::size_t pad = 3 * taps;
  if (x.size() <= pad)
    raise(ErrorCode::TooShort,
          "need more than " + std::to_string(pad) + " samples, got " + std::to_string(x.size()));

  const std::size_t n = x.size();
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  sosfilt_inplace(sections, ext, steady_state(sections, ext.front()));
  std::reverse(ext.begin(), ext.end());
  sosfilt_inplace(sections, ext, steady_state(sections, ext.front()));
  std::reverse(ext.begin(), ext.end());

  return std::vector<double>(ext.begin() + std::ptrdiff_t(pad),
                             ext.begin() + std::ptrdiff_t(pad + n));
}

}  // namespace somno

#include "effortlab/filters.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "effortlab/error.hpp"

namespace effortlab::signal {

namespace {

struct SectionState {
  double z1 = 0.0;
  double z2 = 0.0;
};

// State after a long constant input of value x0.
SectionState SteadyState(const Biquad& s, double x0) {
  const double y = s.DcGain() * x0;
  SectionState st;
  st.z2 = s.b2 * x0 - s.a2 * y;
  st.z1 = y - s.b0 * x0;
  return st;
}

}  // namespace

std::vector<double> BiquadCascade::Filter(std::span<const double> x, bool steady_state_init) const {
  std::vector<double> y(x.begin(), x.end());
  if (y.empty()) return y;
  for (const Biquad& s : sections_) {
    SectionState st = steady_state_init ? SteadyState(s, y.front()) : SectionState{};
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + st.z1;
      st.z1 = s.b1 * in - s.a1 * out + st.z2;
      st.z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

double BiquadCascade::Magnitude(double frequency_hz, double sample_rate) const {
  const double w = 2.0 * std::numbers::pi * frequency_hz / sample_rate;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  double mag = 1.0;
  for (const Biquad& s : sections_) {
    const auto num = s.b0 + s.b1 * z1 + s.b2 * z2;
    const auto den = 1.0 + s.a1 * z1 + s.a2 * z2;
    mag *= std::abs(num / den);
  }
  return mag;
}

BiquadCascade DesignButterworthHighpass(int order, double cutoff_hz, double sample_rate) {
  if (order <= 0 || order % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "Butterworth order must be even and positive");
  }
  if (!(cutoff_hz > 0.0) || cutoff_hz >= 0.5 * sample_rate) {
    throw Error(ErrorCode::kInvalidArgument, "high-pass cutoff must lie in (0, Nyquist)");
  }
  const double k = std::tan(std::numbers::pi * cutoff_hz / sample_rate);
  std::vector<Biquad> sections;
  for (int i = 0; i < order / 2; ++i) {
    const double q = 1.0 / (2.0 * std::sin(std::numbers::pi * (2 * i + 1) / (2.0 * order)));
    const double norm = 1.0 / (1.0 + k / q + k * k);
    Biquad s;
    s.b0 = norm;
    s.b1 = -2.0 * norm;
    s.b2 = norm;
    s.a1 = 2.0 * (k * k - 1.0) * norm;
    s.a2 = (1.0 - k / q + k * k) * norm;
    sections.push_back(s);
  }
  return BiquadCascade(std::move(sections));
}

std::vector<double> FiltFilt(const BiquadCascade& cascade, std::span<const double> x,
                             std::size_t pad) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  pad = std::min(pad, n - 1);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  std::vector<double> y = cascade.Filter(ext, true);
  std::reverse(y.begin(), y.end());
  y = cascade.Filter(y, true);
  std::reverse(y.begin(), y.end());
  return {y.begin() + static_cast<std::ptrdiff_t>(pad),
          y.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

Waveform Highpass(const Waveform& w, double cutoff_hz) {
  Validate(w);
  const double nyquist = 0.5 * w.sample_rate;
  if (!(cutoff_hz > 0.0) || cutoff_hz >= nyquist) {
    throw Error(ErrorCode::kInvalidArgument, "high-pass cutoff " + std::to_string(cutoff_hz) +
                                                 " Hz must lie in (0, " + std::to_string(nyquist) +
                                                 ") Hz");
  }
  constexpr int kOrder = 4;
  // Two passes square the magnitude; move the design point so that
  // |H(cutoff)|^4 = 1/2.
  const double design_cutoff = cutoff_hz * std::pow(std::sqrt(2.0) - 1.0, 1.0 / (2.0 * kOrder));
  const BiquadCascade hp = DesignButterworthHighpass(kOrder, design_cutoff, w.sample_rate);
  const auto pad = static_cast<std::size_t>(std::ceil(3.0 * w.sample_rate / cutoff_hz));
  return Waveform(FiltFilt(hp, w.samples, pad), w.sample_rate);
}

std::vector<double> FirstOrderSection(std::span<const double> x, double zero, double pole) {
  std::vector<double> y(x.size());
  double x_prev = 0.0, y_prev = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    y_prev = x[i] - zero * x_prev + pole * y_prev;
    x_prev = x[i];
    y[i] = y_prev;
  }
  return y;
}

}  // namespace effortlab::signal

#pragma once

#include <array>
#include <span>
#include <vector>

#include "effortlab/waveform.hpp"

namespace effortlab::signal {

// Transposed direct form II, a0 normalized to 1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  double DcGain() const noexcept { return (b0 + b1 + b2) / (1.0 + a1 + a2); }
};

class BiquadCascade {
 public:
  BiquadCascade() = default;
  explicit BiquadCascade(std::vector<Biquad> sections) : sections_(std::move(sections)) {}

  const std::vector<Biquad>& sections() const noexcept { return sections_; }

  // Runs the cascade over x. When steady_state_init is set, every section
  // starts in the state it would have after an infinitely long constant
  // input equal to x.front().
  std::vector<double> Filter(std::span<const double> x, bool steady_state_init) const;

  // Magnitude response at frequency_hz.
  double Magnitude(double frequency_hz, double sample_rate) const;

 private:
  std::vector<Biquad> sections_;
};

// Digital Butterworth high-pass via the bilinear transform with prewarping.
// order must be even.
BiquadCascade DesignButterworthHighpass(int order, double cutoff_hz, double sample_rate);

// Zero-phase forward-backward filtering with `pad` samples of odd
// reflection at both ends (clamped to size-1).
std::vector<double> FiltFilt(const BiquadCascade& cascade, std::span<const double> x,
                             std::size_t pad);

// 4th-order Butterworth, forward-backward. The per-pass design cutoff is
// shifted so the combined magnitude is -3 dB at cutoff_hz.
Waveform Highpass(const Waveform& w, double cutoff_hz);

// y[n] = x[n] - zero*x[n-1] + pole*y[n-1], zero initial state.
std::vector<double> FirstOrderSection(std::span<const double> x, double zero, double pole);

}  // namespace effortlab::signal

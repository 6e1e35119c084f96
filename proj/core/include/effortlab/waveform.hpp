#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace effortlab {

// Mono signal in 64-bit real samples, nominal range [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 0;

  Waveform() = default;
  Waveform(std::vector<double> s, int rate) : samples(std::move(s)), sample_rate(rate) {}

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  double duration_seconds() const noexcept {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
  std::span<const double> view() const noexcept { return samples; }
};

// Throws kInvalidArgument on a non-positive rate and kNonFinite on NaN/Inf.
void Validate(const Waveform& w);

bool AllFinite(std::span<const double> x) noexcept;

double Rms(std::span<const double> x) noexcept;
double MeanSquare(std::span<const double> x) noexcept;
double PeakAbs(std::span<const double> x) noexcept;

// 10*log10 of a power, floored so that silence maps to a finite number.
double PowerToDb(double power) noexcept;
double DbToAmplitude(double db) noexcept;

Waveform Scaled(const Waveform& w, double gain);

}  // namespace effortlab

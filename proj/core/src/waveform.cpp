#include "effortlab/waveform.hpp"

#include <algorithm>
#include <cmath>

#include "effortlab/error.hpp"

namespace effortlab {

namespace {
constexpr double kPowerFloor = 1e-20;  // -200 dB
}  // namespace

void Validate(const Waveform& w) {
  if (w.sample_rate <= 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "sample rate must be positive, got " + std::to_string(w.sample_rate));
  }
  if (!AllFinite(w.samples)) {
    throw Error(ErrorCode::kNonFinite, "waveform contains non-finite samples");
  }
}

bool AllFinite(std::span<const double> x) noexcept {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

double MeanSquare(std::span<const double> x) noexcept {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

double Rms(std::span<const double> x) noexcept { return std::sqrt(MeanSquare(x)); }

double PeakAbs(std::span<const double> x) noexcept {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  return peak;
}

double PowerToDb(double power) noexcept {
  return 10.0 * std::log10(std::max(power, kPowerFloor));
}

double DbToAmplitude(double db) noexcept { return std::pow(10.0, db / 20.0); }

Waveform Scaled(const Waveform& w, double gain) {
  Waveform out = w;
  for (double& v : out.samples) v *= gain;
  return out;
}

}  // namespace effortlab

#include "effortlab/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "effortlab/error.hpp"

namespace effortlab::signal {

namespace {

double BesselI0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum;
}

double KaiserBeta(double attenuation_db) {
  if (attenuation_db > 50.0) return 0.1102 * (attenuation_db - 8.7);
  if (attenuation_db >= 21.0) {
    return 0.5842 * std::pow(attenuation_db - 21.0, 0.4) + 0.07886 * (attenuation_db - 21.0);
  }
  return 0.0;
}

// One table row per output phase; each row sums to one.
struct PolyphaseKernel {
  int up = 1;
  int down = 1;
  int half_taps = 0;
  std::vector<std::vector<double>> phases;
};

PolyphaseKernel DesignKernel(int rate_in, int rate_out, const ResamplerDesign& design) {
  const int g = std::gcd(rate_in, rate_out);
  PolyphaseKernel k;
  k.up = rate_out / g;
  k.down = rate_in / g;

  const double min_rate = std::min(rate_in, rate_out);
  const double cutoff = 0.5 * (design.passband_edge + design.stopband_edge) * min_rate;
  const double transition = (design.stopband_edge - design.passband_edge) * min_rate;
  // Kernel is evaluated in units of input samples.
  const double fc = cutoff / rate_in;
  const double width = transition / rate_in;
  const double span = (design.stopband_attenuation_db - 7.95) / (14.36 * width);
  const double half = 0.5 * span;
  const double beta = KaiserBeta(design.stopband_attenuation_db);
  const double i0_beta = BesselI0(beta);

  k.half_taps = static_cast<int>(std::ceil(half)) + 1;
  const int taps = 2 * k.half_taps;
  k.phases.assign(k.up, std::vector<double>(taps, 0.0));
  for (int p = 0; p < k.up; ++p) {
    const double frac = static_cast<double>(p) / k.up;
    auto& row = k.phases[p];
    for (int j = 0; j < taps; ++j) {
      const double tau = static_cast<double>(k.half_taps - 1 - j) + frac;
      if (std::abs(tau) > half) continue;
      const double arg = 2.0 * fc * tau;
      const double sinc = arg == 0.0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
      const double r = tau / half;
      const double window = BesselI0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
      row[j] = 2.0 * fc * sinc * window;
    }
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    for (double& v : row) v /= sum;
  }
  return k;
}

}  // namespace

Waveform Resample(const Waveform& w, int target_rate, const ResamplerDesign& design) {
  if (target_rate <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "target rate must be positive");
  }
  Validate(w);
  if (w.sample_rate == target_rate) return w;
  if (w.empty()) return Waveform({}, target_rate);

  const PolyphaseKernel kernel = DesignKernel(w.sample_rate, target_rate, design);
  const auto n_in = static_cast<long long>(w.size());
  const long long n_out = (n_in * kernel.up + kernel.down - 1) / kernel.down;
  const int taps = 2 * kernel.half_taps;

  std::vector<double> out(static_cast<std::size_t>(n_out), 0.0);
  for (long long n = 0; n < n_out; ++n) {
    const long long num = n * kernel.down;
    const long long base = num / kernel.up;
    const auto& row = kernel.phases[static_cast<std::size_t>(num % kernel.up)];
    const long long first = base - kernel.half_taps + 1;
    const int j_begin = static_cast<int>(std::max<long long>(0, -first));
    const int j_end = static_cast<int>(std::min<long long>(taps, n_in - first));
    double acc = 0.0;
    for (int j = j_begin; j < j_end; ++j) acc += row[j] * w.samples[first + j];
    out[n] = acc;
  }
  return Waveform(std::move(out), target_rate);
}

}  // namespace effortlab::signal

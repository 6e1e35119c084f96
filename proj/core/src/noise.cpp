#include "effortlab/noise.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "effortlab/error.hpp"
#include "effortlab/ltas.hpp"

namespace effortlab::noise {

std::string_view ToString(MaskerKind kind) {
  switch (kind) {
    case MaskerKind::kCompetingSpeaker: return "competing_speaker";
    case MaskerKind::kSpeechShapedNoise: return "speech_shaped_noise";
  }
  return "unknown";
}

MaskerKind ParseMaskerKind(std::string_view name) {
  if (name == "competing_speaker" || name == "cs") return MaskerKind::kCompetingSpeaker;
  if (name == "speech_shaped_noise" || name == "ssn") return MaskerKind::kSpeechShapedNoise;
  throw Error(ErrorCode::kInvalidArgument, "unknown masker kind '" + std::string(name) + "'");
}

void Validate(const MaskerSpec& spec) {
  if (spec.sources.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "masker needs at least one source file");
  }
  if (spec.kind == MaskerKind::kSpeechShapedNoise && spec.lp_order < 2) {
    throw Error(ErrorCode::kInvalidArgument, "SSN LP order must be at least 2");
  }
}

LpcFit LevinsonDurbin(std::span<const double> r, int order) {
  if (order < 1 || r.size() < static_cast<std::size_t>(order) + 1) {
    throw Error(ErrorCode::kInvalidArgument, "autocorrelation too short for the LP order");
  }
  if (!(r[0] > 0.0)) throw Error(ErrorCode::kInvalidArgument, "zero-energy autocorrelation");
  std::vector<double> a(static_cast<std::size_t>(order) + 1, 0.0), prev;
  a[0] = 1.0;
  double err = r[0];
  for (int i = 1; i <= order; ++i) {
    double acc = r[i];
    for (int j = 1; j < i; ++j) acc += a[j] * r[i - j];
    const double k = -acc / err;
    prev = a;
    for (int j = 1; j < i; ++j) a[j] = prev[j] + k * prev[i - j];
    a[i] = k;
    err *= 1.0 - k * k;
    if (!(err > 0.0)) break;
  }
  LpcFit fit;
  fit.coefficients.assign(a.begin() + 1, a.end());
  fit.prediction_error = err;
  return fit;
}

double LpcPowerResponse(const LpcFit& fit, double frequency_hz, int sample_rate) {
  const double w = 2.0 * std::numbers::pi * frequency_hz / sample_rate;
  std::complex<double> a = 1.0;
  for (std::size_t k = 0; k < fit.coefficients.size(); ++k) {
    a += fit.coefficients[k] * std::polar(1.0, -w * static_cast<double>(k + 1));
  }
  return fit.prediction_error / std::norm(a);
}

LpcFit FitCorpusSpectrum(std::span<const Waveform> reference, int lp_order, int sample_rate) {
  if (reference.empty()) throw Error(ErrorCode::kEmptyInput, "SSN reference corpus is empty");
  if (lp_order < 2) throw Error(ErrorCode::kInvalidArgument, "SSN LP order must be at least 2");
  tilt::LtasConfig ltas;
  ltas.sample_rate = sample_rate;
  const tilt::PowerSpectrum spec = tilt::WelchSpectrum(reference, ltas);

  // Autocorrelation lags of an N-point spectrum, N = 2 * (bins - 1). The
  // one-sided PSD already folds the mirrored bins in.
  const std::size_t bins = spec.psd.size();
  const double n = 2.0 * static_cast<double>(bins - 1);
  std::vector<double> r(static_cast<std::size_t>(lp_order) + 1, 0.0);
  for (int m = 0; m <= lp_order; ++m) {
    double acc = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      acc += spec.psd[k] * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) * m / n);
    }
    r[m] = acc;
  }
  return LevinsonDurbin(r, lp_order);
}

Waveform MakeSpeechShapedNoise(std::span<const Waveform> reference, const SsnConfig& config) {
  if (!(config.duration_s > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "SSN duration must be positive");
  }
  const LpcFit fit = FitCorpusSpectrum(reference, config.lp_order, config.sample_rate);

  const auto n = static_cast<std::size_t>(std::lround(config.duration_s * config.sample_rate));
  const auto warmup = static_cast<std::size_t>(config.sample_rate / 2);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto& a = fit.coefficients;
  std::vector<double> y(n + warmup, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    double v = gauss(rng);
    for (std::size_t k = 0; k < a.size() && k < i; ++k) v -= a[k] * y[i - 1 - k];
    y[i] = v;
  }
  std::vector<double> out(y.begin() + static_cast<std::ptrdiff_t>(warmup), y.end());
  const double rms = Rms(out);
  const double gain = rms > 0.0 ? DbToAmplitude(config.rms_db) / rms : 0.0;
  for (double& v : out) v *= gain;
  return Waveform(std::move(out), config.sample_rate);
}

}  // namespace effortlab::noise

#include "effortlab/enhance.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "effortlab/error.hpp"
#include "effortlab/fft.hpp"
#include "effortlab/keyvalue.hpp"
#include "effortlab/level.hpp"
#include "effortlab/stft.hpp"
#include "effortlab/tilt.hpp"

namespace effortlab::enhance {

namespace {

constexpr double kLn10Over20 = 0.11512925464970229;  // ln(10) / 20
constexpr double kEnvelopeFloor = 1e-10;               // -200 dB

// Ramps start/stop this many octaves outside the nominal pre-emphasis band
// so that the whole band, edges included, sees the full boost.
constexpr double kRampFar = 1.0 / 3.0;
constexpr double kRampNear = 1.0 / 12.0;

bool IsSilent(const Waveform& w) { return PeakAbs(w.samples) == 0.0; }

double LinearRamp(double x, double x0, double x1) {
  return std::clamp((x - x0) / (x1 - x0), 0.0, 1.0);
}

struct FrameGains {
  const ShaperConfig& config;
  int sample_rate;
  int fft_size;
  bool adaptive;
  signal::Fft fft;
  std::vector<double> fixed_db;

  FrameGains(const ShaperConfig& c, int rate, int size, bool adaptive_stages)
      : config(c), sample_rate(rate), fft_size(size), adaptive(adaptive_stages), fft(size) {
    const int bins = size / 2 + 1;
    fixed_db.resize(static_cast<std::size_t>(bins));
    for (int k = 0; k < bins; ++k) {
      fixed_db[k] = FixedStageGainDb(static_cast<double>(k) * rate / size, config);
    }
  }

  // Log-magnitude envelope from the first cepstral_order real-cepstrum
  // coefficients.
  std::vector<double> CepstralEnvelope(std::span<const std::complex<double>> spectrum) const {
    std::vector<std::complex<double>> log_mag(spectrum.size());
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
      log_mag[k] = std::log(std::abs(spectrum[k]) + 1e-12);
    }
    std::vector<double> cepstrum = fft.Inverse(log_mag);
    const int order = std::min(config.cepstral_order, fft_size / 2 - 1);
    for (int n = order + 1; n < fft_size - order; ++n) cepstrum[n] = 0.0;
    const auto smooth = fft.Forward(cepstrum);
    std::vector<double> env(smooth.size());
    for (std::size_t k = 0; k < smooth.size(); ++k) env[k] = smooth[k].real();
    return env;
  }

  // Octave-wide moving average of the linear envelope.
  std::vector<double> OctaveSmoothed(const std::vector<double>& log_env) const {
    const std::size_t bins = log_env.size();
    std::vector<double> prefix(bins + 1, 0.0);
    for (std::size_t k = 0; k < bins; ++k) prefix[k + 1] = prefix[k] + std::exp(log_env[k]);
    std::vector<double> out(bins);
    const double half_octave = std::sqrt(2.0);
    for (std::size_t k = 0; k < bins; ++k) {
      const auto lo = static_cast<std::size_t>(std::floor(static_cast<double>(k) / half_octave));
      const auto hi = std::min(bins - 1, static_cast<std::size_t>(std::ceil(k * half_octave)));
      out[k] = std::log((prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1));
    }
    return out;
  }

  void Apply(std::vector<std::complex<double>>& spectrum, double voicing) const {
    const std::size_t bins = spectrum.size();
    std::vector<double> gain_db = fixed_db;
    if (adaptive && voicing > 0.0) {
      const std::vector<double> env = CepstralEnvelope(spectrum);
      const std::vector<double> smoothed = OctaveSmoothed(env);
      const double exponent = config.sharpen_strength * voicing;
      const double nyquist = 0.5 * sample_rate;
      const double boost_span = std::log2(nyquist / 1000.0);
      for (std::size_t k = 0; k < bins; ++k) {
        gain_db[k] += exponent * (env[k] - smoothed[k]) / kLn10Over20;
        const double f = static_cast<double>(k) * sample_rate / fft_size;
        if (f > 1000.0 && boost_span > 0.0) {
          gain_db[k] += config.hf_boost_max_db * voicing * std::log2(f / 1000.0) / boost_span;
        }
      }
    }
    for (std::size_t k = 0; k < bins; ++k) {
      const double g = std::clamp(gain_db[k], config.gain_floor_db, config.gain_cap_db);
      spectrum[k] *= std::exp(g * kLn10Over20);
    }
  }
};

Waveform Shape(const Waveform& w, const ShaperConfig& config, bool adaptive) {
  Validate(w);
  Validate(config);
  if (w.sample_rate < 8000) {
    throw Error(ErrorCode::kInvalidArgument, "spectral shaping needs a sample rate of at least 8 kHz");
  }
  if (w.empty() || IsSilent(w)) return w;

  const signal::StftConfig stft{config.frame_ms, 0.5 * config.frame_ms, signal::WindowKind::kSqrtHann};
  const int frame = static_cast<int>(std::lround(config.frame_ms * w.sample_rate / 1000.0));
  if (frame % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "shaper frame must be an even number of samples");
  }
  const auto hop = static_cast<std::size_t>(frame / 2);

  signal::StftGrid grid = signal::Stft(w, stft);
  const FrameGains gains(config, w.sample_rate, grid.fft_size(), adaptive);
  std::vector<double> segment(static_cast<std::size_t>(frame));
  for (std::size_t f = 0; f < grid.n_frames(); ++f) {
    double voicing = 0.0;
    if (adaptive) {
      const std::size_t start = f * hop;
      for (int i = 0; i < frame; ++i) {
        const std::size_t idx = start + static_cast<std::size_t>(i);
        const bool inside = idx >= grid.lead && idx - grid.lead < w.size();
        segment[i] = inside ? w.samples[idx - grid.lead] : 0.0;
      }
      voicing = tilt::VoicingProbability(segment, w.sample_rate);
    }
    gains.Apply(grid.frames[f], voicing);
  }
  return signal::Istft(grid);
}

// Magnitude of the analytic signal with a windowed FIR Hilbert
// transformer. The ideal transformer's 1/t tails would smear loud onsets
// into neighbouring pauses; truncating at +-8 ms keeps the envelope local.
std::vector<double> HilbertEnvelope(std::span<const double> x, int sample_rate) {
  const auto half = static_cast<std::ptrdiff_t>(std::lround(0.008 * sample_rate)) | 1;
  std::vector<double> taps(static_cast<std::size_t>(half) + 1, 0.0);  // odd lags only
  for (std::ptrdiff_t k = 1; k <= half; k += 2) {
    const double t = static_cast<double>(k) / static_cast<double>(half + 1);
    const double blackman = 0.42 + 0.5 * std::cos(std::numbers::pi * t) + 0.08 * std::cos(2.0 * std::numbers::pi * t);
    taps[static_cast<std::size_t>(k)] = 2.0 / (std::numbers::pi * static_cast<double>(k)) * blackman;
  }
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::vector<double> env(x.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double quad = 0.0;
    for (std::ptrdiff_t k = 1; k <= half; k += 2) {
      const double before = i - k >= 0 ? x[static_cast<std::size_t>(i - k)] : 0.0;
      const double after = i + k < n ? x[static_cast<std::size_t>(i + k)] : 0.0;
      quad += taps[static_cast<std::size_t>(k)] * (before - after);
    }
    env[static_cast<std::size_t>(i)] = std::hypot(x[static_cast<std::size_t>(i)], quad);
  }
  return env;
}

}  // namespace

IoecCurve IoecCurve::Default() {
  return IoecCurve{{{-60.0, -40.0}, {-40.0, -25.0}, {-25.0, -17.0}, {-10.0, -11.0}, {0.0, -9.0}}};
}

IoecCurve IoecCurve::Identity() { return IoecCurve{{{-100.0, -100.0}, {0.0, 0.0}}}; }

double IoecCurve::Evaluate(double input_db) const { return input_db + GainDb(input_db); }

double IoecCurve::GainDb(double input_db) const {
  const auto& first = knots.front();
  const auto& last = knots.back();
  if (input_db <= first.first) return first.second - first.first;
  if (input_db >= last.first) return last.second - last.first;
  const auto upper = std::upper_bound(knots.begin(), knots.end(), input_db,
                                      [](double v, const auto& knot) { return v < knot.first; });
  const auto lower = upper - 1;
  const double t = (input_db - lower->first) / (upper->first - lower->first);
  const double out = lower->second + t * (upper->second - lower->second);
  return out - input_db;
}

void Validate(const IoecCurve& curve) {
  if (curve.knots.size() < 2) throw Error(ErrorCode::kConfig, "IOEC curve needs at least two knots");
  for (std::size_t i = 0; i < curve.knots.size(); ++i) {
    const auto& [in, out] = curve.knots[i];
    if (!std::isfinite(in) || !std::isfinite(out)) {
      throw Error(ErrorCode::kConfig, "IOEC knot values must be finite");
    }
    if (i == 0) continue;
    if (!(in > curve.knots[i - 1].first)) {
      throw Error(ErrorCode::kConfig, "IOEC knot inputs must be strictly increasing");
    }
    if (out < curve.knots[i - 1].second) {
      throw Error(ErrorCode::kConfig, "IOEC curve must be monotone non-decreasing");
    }
  }
}

void Validate(const ShaperConfig& c) {
  const bool finite = std::isfinite(c.sharpen_strength) && std::isfinite(c.hf_boost_max_db) &&
                      std::isfinite(c.preemph_gain_db) && std::isfinite(c.lowcut_db_per_octave) &&
                      std::isfinite(c.gain_floor_db) && std::isfinite(c.gain_cap_db);
  if (!finite) throw Error(ErrorCode::kConfig, "shaper gains must be finite");
  if (c.sharpen_strength < 0.0) throw Error(ErrorCode::kConfig, "sharpen strength must be >= 0");
  if (!(c.lowcut_hz > 0.0) || !(c.preemph_lo_hz > c.lowcut_hz) || !(c.preemph_hi_hz > c.preemph_lo_hz)) {
    throw Error(ErrorCode::kConfig, "shaper band edges must be positive and increasing");
  }
  if (!(c.gain_cap_db >= c.gain_floor_db)) throw Error(ErrorCode::kConfig, "gain cap below floor");
  if (c.cepstral_order < 1) throw Error(ErrorCode::kConfig, "cepstral order must be positive");
  if (!(c.frame_ms > 0.0)) throw Error(ErrorCode::kConfig, "frame length must be positive");
}

double FixedStageGainDb(double f, const ShaperConfig& c) {
  if (f <= 0.0) return c.gain_floor_db;
  if (f < c.lowcut_hz) {
    return std::max(c.gain_floor_db, -c.lowcut_db_per_octave * std::log2(c.lowcut_hz / f));
  }
  const double octaves_lo = std::log2(f / c.preemph_lo_hz);
  const double octaves_hi = std::log2(f / c.preemph_hi_hz);
  const double rise = LinearRamp(octaves_lo, -kRampFar, -kRampNear);
  const double fall = 1.0 - LinearRamp(octaves_hi, kRampNear, kRampFar);
  return c.preemph_gain_db * std::min(rise, fall);
}

Waveform ApplyFixedStage(const Waveform& w, const ShaperConfig& config) {
  return Shape(w, config, false);
}

Waveform SpectralShaping(const Waveform& w, const ShaperConfig& config) {
  const Waveform shaped = Shape(w, config, true);
  if (IsSilent(shaped)) return shaped;
  return EqualPowerNormalize(shaped, w).output;
}

std::vector<double> EnvelopeDb(const Waveform& w, double attack_ms, double release_ms) {
  Validate(w);
  if (!(attack_ms > 0.0) || !(release_ms > 0.0)) {
    throw Error(ErrorCode::kConfig, "attack and release must be positive");
  }
  const std::vector<double> env = HilbertEnvelope(w.samples, w.sample_rate);
  const double a_att = std::exp(-1000.0 / (attack_ms * w.sample_rate));
  const double a_rel = std::exp(-1000.0 / (release_ms * w.sample_rate));
  std::vector<double> out(env.size());
  double e = env.empty() ? 0.0 : env.front();
  for (std::size_t n = 0; n < env.size(); ++n) {
    const double a = env[n] > e ? a_att : a_rel;
    e = a * e + (1.0 - a) * env[n];
    out[n] = 20.0 * std::log10(std::max(e, kEnvelopeFloor));
  }
  return out;
}

Waveform Drc(const Waveform& w, const DrcConfig& config) {
  Validate(config.curve);
  const std::vector<double> env_db = EnvelopeDb(w, config.attack_ms, config.release_ms);
  Waveform out = w;
  for (std::size_t n = 0; n < out.size(); ++n) {
    out.samples[n] *= DbToAmplitude(config.curve.GainDb(env_db[n]));
  }
  return out;
}

NormalizeResult EqualPowerNormalize(const Waveform& out, const Waveform& ref) {
  const double ref_level = noise::ActiveSpeechLevel(ref);
  const double out_level = noise::ActiveSpeechLevel(out);
  NormalizeResult r;
  r.gain_db = ref_level - out_level;
  r.output = Scaled(out, DbToAmplitude(r.gain_db));
  r.peak = PeakAbs(r.output.samples);
  r.clipped = r.peak > 1.0;
  return r;
}

Waveform Ssdrc(const Waveform& w, const EnhancerConfig& config) {
  Validate(w);
  Validate(config.drc.curve);
  if (w.empty() || IsSilent(w)) return w;
  const Waveform compressed = Drc(SpectralShaping(w, config.shaper), config.drc);
  return EqualPowerNormalize(compressed, w).output;
}

double EnvelopeDbStd(const Waveform& w, const Waveform& reference) {
  Validate(w);
  Validate(reference);
  if (w.sample_rate != reference.sample_rate) {
    throw Error(ErrorCode::kInvalidArgument, "envelope comparison needs equal sample rates");
  }
  const double threshold = noise::MeasureActiveLevel(reference).threshold_db;
  const auto frame = static_cast<std::size_t>(std::max(1, w.sample_rate / 100));
  const std::size_t usable = std::min(w.size(), reference.size());
  std::vector<double> kept;
  for (std::size_t start = 0; start + frame <= usable; start += frame) {
    const auto span_of = [&](const Waveform& x) { return std::span<const double>(x.samples).subspan(start, frame); };
    if (PowerToDb(MeanSquare(span_of(reference))) >= threshold) {
      kept.push_back(PowerToDb(MeanSquare(span_of(w))));
    }
  }
  if (kept.empty()) return 0.0;
  const double mean = std::accumulate(kept.begin(), kept.end(), 0.0) / static_cast<double>(kept.size());
  double ss = 0.0;
  for (double l : kept) ss += (l - mean) * (l - mean);
  return std::sqrt(ss / static_cast<double>(kept.size()));
}

EnhancerConfig ParseEnhancerConfig(std::string_view text) {
  EnhancerConfig config;
  for (const auto& [key, value] : ParseKeyValue(text)) {
    if (key == "sharpen_strength") {
      config.shaper.sharpen_strength = ParseDouble(value, key);
    } else if (key == "hf_boost_max_db") {
      config.shaper.hf_boost_max_db = ParseDouble(value, key);
    } else if (key == "frame_ms") {
      config.shaper.frame_ms = ParseDouble(value, key);
    } else if (key == "attack_ms") {
      config.drc.attack_ms = ParseDouble(value, key);
    } else if (key == "release_ms") {
      config.drc.release_ms = ParseDouble(value, key);
    } else if (key == "ioec") {
      IoecCurve curve;
      std::string_view rest = value;
      while (!rest.empty()) {
        const auto comma = rest.find(',');
        const std::string_view item = rest.substr(0, comma);
        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
        const auto colon = item.find(':');
        if (colon == std::string_view::npos) {
          throw Error(ErrorCode::kConfig, "IOEC knot must be written in:out");
        }
        curve.knots.emplace_back(ParseDouble(item.substr(0, colon), "ioec input"),
                                 ParseDouble(item.substr(colon + 1), "ioec output"));
      }
      config.drc.curve = curve;
    } else {
      throw Error(ErrorCode::kConfig, "unknown enhancer config key '" + key + "'");
    }
  }
  Validate(config.shaper);
  Validate(config.drc.curve);
  return config;
}

std::string FormatEnhancerConfig(const EnhancerConfig& config) {
  std::string out;
  out += "sharpen_strength = " + FormatDouble(config.shaper.sharpen_strength) + "\n";
  out += "hf_boost_max_db = " + FormatDouble(config.shaper.hf_boost_max_db) + "\n";
  out += "frame_ms = " + FormatDouble(config.shaper.frame_ms) + "\n";
  out += "attack_ms = " + FormatDouble(config.drc.attack_ms) + "\n";
  out += "release_ms = " + FormatDouble(config.drc.release_ms) + "\n";
  out += "ioec = ";
  for (std::size_t i = 0; i < config.drc.curve.knots.size(); ++i) {
    if (i > 0) out += ", ";
    out += FormatDouble(config.drc.curve.knots[i].first) + ":" +
           FormatDouble(config.drc.curve.knots[i].second);
  }
  out += "\n";
  return out;
}

}  // namespace effortlab::enhance

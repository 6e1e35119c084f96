#include "effortlab/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "effortlab/error.hpp"
#include "effortlab/file_util.hpp"
#include "effortlab/level.hpp"
#include "effortlab/transcript.hpp"

namespace effortlab::synth {

namespace {

constexpr int kFormants = 4;
using Formants = std::array<double, kFormants>;
constexpr Formants kBandwidths = {70.0, 100.0, 140.0, 200.0};

enum class Kind { kVowel, kSonorant, kFricative, kVoicedFricative, kStop, kPause };

struct Segment {
  Kind kind = Kind::kPause;
  double duration_s = 0.0;
  Formants formants{500.0, 1500.0, 2500.0, 3500.0};
  double noise_center_hz = 4500.0;
  double pitch = 1.0;  // word-level F0 multiplier
};

Formants VowelFormants(char c) {
  switch (c) {
    case 'a': return {730.0, 1090.0, 2440.0, 3400.0};
    case 'e': return {530.0, 1840.0, 2480.0, 3500.0};
    case 'i': return {300.0, 2250.0, 3000.0, 3700.0};
    case 'o': return {570.0, 840.0, 2410.0, 3300.0};
    case 'u': return {320.0, 900.0, 2240.0, 3300.0};
    default: return {420.0, 1800.0, 2600.0, 3500.0};  // y
  }
}

bool IsVowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y'; }

Segment LetterSegment(char c) {
  Segment s;
  if (IsVowel(c)) {
    s.kind = Kind::kVowel;
    s.duration_s = 0.085;
    s.formants = VowelFormants(c);
  } else if (c == 'l' || c == 'r' || c == 'w' || c == 'j') {
    s.kind = Kind::kSonorant;
    s.duration_s = 0.055;
    s.formants = {350.0, c == 'r' ? 1300.0 : 1000.0, c == 'r' ? 1700.0 : 2600.0, 3400.0};
  } else if (c == 'm' || c == 'n') {
    s.kind = Kind::kSonorant;
    s.duration_s = 0.06;
    s.formants = {280.0, 1200.0, 2500.0, 3400.0};
  } else if (c == 's' || c == 'c' || c == 'x') {
    s.kind = Kind::kFricative;
    s.duration_s = 0.09;
    s.noise_center_hz = 5500.0;
  } else if (c == 'z') {
    s.kind = Kind::kVoicedFricative;
    s.duration_s = 0.07;
    s.noise_center_hz = 5000.0;
  } else if (c == 'f' || c == 'h') {
    s.kind = Kind::kFricative;
    s.duration_s = 0.07;
    s.noise_center_hz = c == 'h' ? 1500.0 : 3500.0;
  } else if (c == 'v') {
    s.kind = Kind::kVoicedFricative;
    s.duration_s = 0.06;
    s.noise_center_hz = 3500.0;
  } else {
    s.kind = Kind::kStop;
    s.duration_s = 0.06;
    s.noise_center_hz = (c == 'k' || c == 'g' || c == 'q') ? 2000.0 : 4000.0;
  }
  return s;
}

// Two-pole resonator with unity gain at DC.
struct Resonator {
  double y1 = 0.0, y2 = 0.0;
  double Step(double x, double freq, double bw, double fs) {
    const double r = std::exp(-std::numbers::pi * bw / fs);
    const double a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq / fs);
    const double a2 = -r * r;
    const double y = (1.0 - a1 - a2) * x + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

// Bandpass resonator normalized to unit peak gain.
struct Bandpass {
  double y1 = 0.0, y2 = 0.0;
  double Step(double x, double freq, double bw, double fs) {
    const double r = std::exp(-std::numbers::pi * bw / fs);
    const double a1 = 2.0 * r * std::cos(2.0 * std::numbers::pi * freq / fs);
    const double y = (1.0 - r) * x + a1 * y1 - r * r * y2;
    y2 = y1;
    y1 = y;
    return y;
  }
};

}  // namespace

VoiceParams Voice(int index) {
  VoiceParams v;
  if (index == 2) {
    v.f0_hz = 205.0;
    v.effort = 0.2;
    v.rate = 1.1;
  } else if (index != 1) {
    throw Error(ErrorCode::kInvalidArgument, "voice index must be 1 or 2");
  }
  return v;
}

Waveform Synthesize(std::string_view text, const VoiceParams& voice, std::uint64_t seed) {
  if (voice.sample_rate <= 0 || !(voice.f0_hz > 0.0) || !(voice.rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "voice needs positive sample rate, f0 and rate");
  }
  if (!(voice.effort >= -1.0 && voice.effort <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "voice effort must lie in [-1, 1]");
  }
  const auto words = eval::NormalizeTranscript(text);
  if (words.empty()) throw Error(ErrorCode::kInvalidArgument, "nothing to synthesize");

  std::mt19937_64 rng(Fnv1a64(text, seed ^ 0x5eedULL));
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Segment> plan;
  plan.push_back({Kind::kPause, 0.15});
  for (const auto& word : words) {
    // Word accents spread F0 so harmonics do not pile up in fixed bands.
    const double pitch = std::exp(0.12 * gauss(rng));
    for (char c : word) {
      if (c < 'a' || c > 'z') continue;
      plan.push_back(LetterSegment(c));
      plan.back().pitch = pitch;
    }
    plan.push_back({Kind::kPause, 0.07});
    plan.back().pitch = pitch;
  }
  plan.back().duration_s = 0.15;

  const double fs = voice.sample_rate;
  std::size_t total = 0;
  for (const auto& s : plan) total += static_cast<std::size_t>(std::lround(s.duration_s / voice.rate * fs));

  // Source slope: a one-pole low-pass whose pole moves toward 1 as effort
  // drops, steepening the spectrum.
  const double source_pole = 0.80 - 0.15 * voice.effort;
  const double smooth = std::exp(-1.0 / (0.012 * fs));  // formant glide
  const double env_smooth = std::exp(-1.0 / (0.006 * fs));

  std::vector<double> out;
  out.reserve(total);
  std::array<Resonator, kFormants> vocal{};
  Bandpass fricative;
  Formants current = plan[1 < plan.size() ? 1 : 0].formants;
  double voiced_env = 0.0, noise_env = 0.0, noise_center = 4500.0;
  double phase = 0.0, source_state = 0.0, period_jitter = 1.0, radiation_prev = 0.0;
  double pulse = 0.0, pitch = 1.0;
  const double pitch_smooth = std::exp(-1.0 / (0.04 * fs));

  std::size_t n = 0;
  for (const auto& seg : plan) {
    const auto len = static_cast<std::size_t>(std::lround(seg.duration_s / voice.rate * fs));
    double voiced_target = 0.0, noise_target = 0.0;
    switch (seg.kind) {
      case Kind::kVowel: voiced_target = 1.0; break;
      case Kind::kSonorant: voiced_target = 0.45; break;
      case Kind::kFricative: noise_target = 0.30; break;
      case Kind::kVoicedFricative: voiced_target = 0.25; noise_target = 0.20; break;
      case Kind::kStop: break;
      case Kind::kPause: break;
    }
    const bool has_formants = seg.kind == Kind::kVowel || seg.kind == Kind::kSonorant ||
                              seg.kind == Kind::kVoicedFricative;
    for (std::size_t i = 0; i < len; ++i, ++n) {
      const double t = static_cast<double>(n) / static_cast<double>(std::max<std::size_t>(total, 1));
      // Declination with a gentle per-utterance wobble.
      pitch = seg.pitch + pitch_smooth * (pitch - seg.pitch);
      const double f0 = voice.f0_hz * pitch * (1.12 - 0.25 * t + 0.04 * std::sin(2.0 * std::numbers::pi * 1.7 * t));
      phase += f0 * period_jitter / fs;
      pulse = 0.0;
      if (phase >= 1.0) {
        phase -= 1.0;
        pulse = 1.0;
        period_jitter = 1.0 + 0.006 * gauss(rng);
      }
      source_state = pulse + source_pole * source_state;

      double noise_in = gauss(rng);
      double burst = 0.0;
      if (seg.kind == Kind::kStop && i >= len * 2 / 3 && i < len * 2 / 3 + static_cast<std::size_t>(0.012 * fs)) {
        burst = 0.5;
      }

      if (has_formants) {
        for (int k = 0; k < kFormants; ++k) current[k] = seg.formants[k] + smooth * (current[k] - seg.formants[k]);
      }
      voiced_env = voiced_target + env_smooth * (voiced_env - voiced_target);
      noise_env = noise_target + env_smooth * (noise_env - noise_target);
      noise_center = seg.noise_center_hz + smooth * (noise_center - seg.noise_center_hz);

      double v = source_state * voiced_env;
      for (int k = 0; k < kFormants; ++k) v = vocal[k].Step(v, current[k], kBandwidths[k], fs);
      const double nz = fricative.Step(noise_in, std::min(noise_center, 0.45 * fs), 0.4 * noise_center, fs);
      double y = v + (noise_env + burst) * nz;
      // Lip radiation: first difference, scaled to keep the passband gain.
      const double radiated = y - 0.5 * radiation_prev;
      radiation_prev = y;
      out.push_back(radiated);
    }
  }

  Waveform w(std::move(out), voice.sample_rate);
  const double level = noise::ActiveSpeechLevel(w);
  const double gain = DbToAmplitude(voice.active_level_db - level);
  const double floor = DbToAmplitude(voice.noise_floor_db);
  for (double& x : w.samples) x = x * gain + floor * gauss(rng);
  return w;
}

std::vector<Waveform> SynthesizeCorpus(const std::vector<std::string_view>& texts,
                                       const VoiceParams& voice, double effort_spread,
                                       std::uint64_t seed) {
  std::vector<Waveform> corpus;
  corpus.reserve(texts.size());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    VoiceParams v = voice;
    v.effort = std::clamp(voice.effort + effort_spread * gauss(rng), -1.0, 1.0);
    corpus.push_back(Synthesize(texts[i], v, seed + i));
  }
  return corpus;
}

}  // namespace effortlab::synth

#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "effortlab/waveform.hpp"

namespace effortlab::enhance {

// Input-output envelope characteristic in dB re full scale. Beyond the
// first and last knots the gain of the end knot is held.
struct IoecCurve {
  std::vector<std::pair<double, double>> knots;

  static IoecCurve Default();
  static IoecCurve Identity();

  double Evaluate(double input_db) const;
  double GainDb(double input_db) const;
};

// Throws kConfig for fewer than two knots, non-increasing inputs or
// decreasing outputs.
void Validate(const IoecCurve& curve);

struct ShaperConfig {
  double sharpen_strength = 0.3;  // exponent on envelope / smoothed envelope
  double hf_boost_max_db = 6.0;   // reached at Nyquist for fully voiced frames
  double preemph_lo_hz = 1000.0;
  double preemph_hi_hz = 4000.0;
  double preemph_gain_db = 12.0;
  double lowcut_hz = 500.0;
  double lowcut_db_per_octave = 6.0;
  int cepstral_order = 30;
  double frame_ms = 32.0;
  double gain_floor_db = -30.0;
  double gain_cap_db = 20.0;
};

void Validate(const ShaperConfig& config);

struct DrcConfig {
  IoecCurve curve = IoecCurve::Default();
  double attack_ms = 2.0;
  double release_ms = 20.0;
};

struct EnhancerConfig {
  ShaperConfig shaper;
  DrcConfig drc;
};

// Key-value file: sharpen_strength, hf_boost_max_db, ioec ("in:out, ..."),
// attack_ms, release_ms, frame_ms. Missing keys keep their defaults.
EnhancerConfig ParseEnhancerConfig(std::string_view text);
std::string FormatEnhancerConfig(const EnhancerConfig& config);

// Non-adaptive pre-emphasis stage in dB at frequency_hz.
double FixedStageGainDb(double frequency_hz, const ShaperConfig& config);

// The fixed stage alone, run through the same STFT path as the full shaper.
Waveform ApplyFixedStage(const Waveform& w, const ShaperConfig& config = {});

// Three-stage STFT shaping: voicing-scaled formant sharpening and
// high-frequency boost, then the fixed pre-emphasis. Output active level
// equals the input's; silence stays silence.
Waveform SpectralShaping(const Waveform& w, const ShaperConfig& config = {});

// Hilbert envelope smoothed by an attack/release one-pole follower, in dB.
std::vector<double> EnvelopeDb(const Waveform& w, double attack_ms, double release_ms);

// Per-sample gain IOEC(env) - env applied to the waveform.
Waveform Drc(const Waveform& w, const DrcConfig& config = {});

struct NormalizeResult {
  Waveform output;
  double gain_db = 0.0;
  bool clipped = false;
  double peak = 0.0;
};

// Scale `out` so its active level matches `ref`. Flags (does not prevent)
// digital clipping.
NormalizeResult EqualPowerNormalize(const Waveform& out, const Waveform& ref);

// Drc(SpectralShaping(w)) normalized to the input's active level.
Waveform Ssdrc(const Waveform& w, const EnhancerConfig& config = {});

// Standard deviation of 10 ms frame levels (dB) of `w` over the frames
// where `reference` is active speech, i.e. at or above its P.56 activity
// threshold. Pass the same signal twice to measure it against itself.
// Both signals must have the same rate; frames beyond the shorter signal
// are ignored.
double EnvelopeDbStd(const Waveform& w, const Waveform& reference);

}  // namespace effortlab::enhance

#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "effortlab/waveform.hpp"

namespace effortlab::synth {

// Formant synthesizer producing speech-like test material: a glottal pulse
// train through vowel and sonorant resonators, shaped noise for fricatives
// and bursts, word pauses and a low noise floor. It is not intelligible
// speech; it gives the analysis chain voiced frames with a controllable
// spectral tilt.
struct VoiceParams {
  double f0_hz = 120.0;
  // Source spectral slope; +1 is flat/pressed (loud), -1 steep/breathy (soft).
  double effort = 0.0;
  double rate = 1.0;  // speaking-rate multiplier; 2 halves durations
  int sample_rate = 16000;
  double active_level_db = -26.0;
  double noise_floor_db = -80.0;
};

// Throws kInvalidArgument for a non-positive rate or f0, effort outside
// [-1, 1], or text without a single word.
Waveform Synthesize(std::string_view text, const VoiceParams& voice, std::uint64_t seed);

// Two reference voices for desk experiments.
VoiceParams Voice(int index);

// One utterance per text line. Each utterance's effort is drawn around the
// voice's effort with the given standard deviation (clamped to [-1, 1]).
std::vector<Waveform> SynthesizeCorpus(const std::vector<std::string_view>& texts,
                                       const VoiceParams& voice, double effort_spread,
                                       std::uint64_t seed);

}  // namespace effortlab::synth

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "effortlab/waveform.hpp"

namespace effortlab::noise {

struct MixRecipe {
  double snr_db = 0.0;
  double lead_s = 0.5;
  double lag_s = 0.5;
  // Rescale the target to this active level before mixing.
  std::optional<double> target_level_db;
  // Scale the whole mixture (both components) down if it would clip.
  bool headroom = false;
};

void Validate(const MixRecipe& recipe);

struct MixResult {
  Waveform mixture;
  Waveform target_component;  // target delayed by the lead, zero padded
  Waveform masker_component;  // scaled masker segment
  std::size_t target_offset = 0;
  std::size_t target_length = 0;
  double masker_gain = 1.0;
  double headroom_gain = 1.0;
  bool clipped = false;
  double peak = 0.0;
};

// The masker segment starts at masker_offset samples. Masker level is plain
// RMS over the segment; target level is P.56 active level.
MixResult MixAtSnr(const Waveform& target, const Waveform& masker, const MixRecipe& recipe,
                   std::size_t masker_offset = 0);

// Re-measures SNR from the stored clean components.
double MeasureSnr(const MixResult& mix);

// Deterministic competing-speaker segment start derived from the trial id.
std::size_t MaskerOffsetForTrial(std::string_view trial_id, std::size_t masker_length,
                                 std::size_t needed, std::uint64_t seed = 0);

}  // namespace effortlab::noise

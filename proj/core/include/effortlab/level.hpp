#pragma once

#include <cstddef>

#include "effortlab/waveform.hpp"

namespace effortlab::noise {

// ITU-T P.56 method B structure: two-stage exponential envelope, hangover,
// and a search for the threshold sitting `margin_db` below the active level.
struct ActiveLevelConfig {
  double time_constant_s = 0.03;
  double hangover_s = 0.2;
  double margin_db = 15.9;
  double search_tolerance_db = 0.001;
};

struct ActiveLevel {
  double level_db = 0.0;        // active mean square, dB re full scale
  double long_term_db = 0.0;    // mean square over the whole signal
  double activity = 0.0;        // fraction of samples counted active
  double threshold_db = 0.0;
};

// Throws kNoActivity for silent input.
ActiveLevel MeasureActiveLevel(const Waveform& w, const ActiveLevelConfig& config = {});
double ActiveSpeechLevel(const Waveform& w, const ActiveLevelConfig& config = {});

}  // namespace effortlab::noise

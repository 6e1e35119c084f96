#pragma once

#include "effortlab/waveform.hpp"

namespace effortlab::signal {

// Rational-ratio polyphase resampler with a Kaiser-windowed sinc kernel.
// The transition band sits just below the lower of the two Nyquist
// frequencies: passband ripple <= 0.1 dB up to 0.4*min(rate), >= 60 dB
// rejection from 0.5*min(rate).
struct ResamplerDesign {
  double passband_edge = 0.40;  // fraction of min(rate_in, rate_out)
  double stopband_edge = 0.50;
  double stopband_attenuation_db = 80.0;
};

Waveform Resample(const Waveform& w, int target_rate, const ResamplerDesign& design = {});

}  // namespace effortlab::signal

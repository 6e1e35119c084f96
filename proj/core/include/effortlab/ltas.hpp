#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "effortlab/waveform.hpp"

namespace effortlab::tilt {

// Welch averaging with Hann frames; band levels are the mean power spectral
// density within fractional-octave bands.
struct LtasConfig {
  int sample_rate = 16000;
  double frame_ms = 64.0;
  double hop_ms = 32.0;
  int bands_per_octave = 3;
  double min_hz = 50.0;
  double max_hz = 8000.0;
};

// One-sided PSD averaged over every frame of every file.
struct PowerSpectrum {
  std::vector<double> psd;
  double bin_hz = 0.0;
  int sample_rate = 0;
  std::size_t n_frames = 0;
};

struct LtasCurve {
  std::vector<double> band_hz;
  std::vector<double> level_db;
  std::vector<double> band_power;  // linear, same order as band_hz
  std::size_t n_frames = 0;
};

std::vector<double> BandCenters(const LtasConfig& config);

PowerSpectrum WelchSpectrum(std::span<const Waveform> corpus, const LtasConfig& config = {});
LtasCurve BandLevels(const PowerSpectrum& spectrum, const LtasConfig& config = {});

// Throws kEmptyInput on an empty corpus. Files are resampled to
// config.sample_rate first.
LtasCurve Ltas(std::span<const Waveform> corpus, const LtasConfig& config = {});

// Frame-count-weighted power average of curves over identical bands.
LtasCurve MergeLtas(std::span<const LtasCurve> curves);

// Mean level in dB over bands whose centers fall in [lo_hz, hi_hz].
double MeanLevelDb(const LtasCurve& curve, double lo_hz, double hi_hz);

}  // namespace effortlab::tilt

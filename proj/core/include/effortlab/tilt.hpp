#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "effortlab/waveform.hpp"

namespace effortlab::tilt {

// Autocorrelation voicing detector. The peak of the energy-normalized
// autocorrelation over pitch lags is mapped affinely from
// [corr_floor, corr_ceiling] onto [0, 1].
struct VoicingConfig {
  double min_f0_hz = 50.0;
  double max_f0_hz = 400.0;
  double corr_floor = 0.3;
  double corr_ceiling = 0.7;
  // Frames more than this far below the loudest frame of the utterance are
  // never voiced.
  double relative_floor_db = -30.0;
};

// Frames shorter than 25 ms are rejected. Silence gives 0.
double VoicingProbability(std::span<const double> frame, int sample_rate,
                          const VoicingConfig& config = {});

// First-order LPC predictor coefficient -r(1)/r(0) from the biased
// autocorrelation. Throws kUndefinedTilt on a zero-energy frame.
double FrameTilt(std::span<const double> frame);

struct TiltAnalysisConfig {
  int analysis_rate = 16000;
  double highpass_hz = 70.0;  // <= 0 disables the high-pass stage
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  bool force_voiced = false;
  VoicingConfig voicing;
};

struct UtteranceTilt {
  double tilt = 0.0;
  std::size_t voiced_frames = 0;
  std::size_t total_frames = 0;
};

// Resample to the analysis rate and high-pass.
Waveform PrepareForAnalysis(const Waveform& w, const TiltAnalysisConfig& config = {});

// Mean frame tilt over voiced frames. Throws kNoVoicing when none qualify.
UtteranceTilt AnalyzeUtterance(const Waveform& w, const TiltAnalysisConfig& config = {});
double UtteranceTiltValue(const Waveform& w, const TiltAnalysisConfig& config = {});

// Corpus statistics of raw utterance tilt. The normalized scale maps
// [lo, median, hi] onto [-1, 0, +1]; positive means flatter tilt, i.e.
// higher vocal effort.
struct TiltStats {
  double median = 0.0;
  double sigma = 0.0;
  double lo = 0.0;  // median - 3 sigma
  double hi = 0.0;  // median + 3 sigma
  std::size_t n_utterances = 0;

  static TiltStats FromMedianSigma(double median, double sigma, std::size_t n = 0);
  // Recovers median and sigma from a published [M - 3 sigma, M + 3 sigma].
  static TiltStats FromRange(double lo, double hi);

  // Linear map, unclipped. Exact at lo, median and hi.
  double NormalizeLinear(double raw) const;
  // NormalizeLinear clipped to [-1, 1].
  double Normalize(double raw) const;
  // Inverse of NormalizeLinear; extrapolates linearly beyond +-1.
  double Denormalize(double normalized) const;
};

// Throws kDegenerateStats unless the stats have positive finite sigma.
void CheckNonDegenerate(const TiltStats& stats);

// Median and (n-1) standard deviation of per-utterance raw tilts.
TiltStats FitNormalizer(std::span<const double> corpus_tilts);

double NormalizeTilt(double raw, const TiltStats& stats);

std::string FormatStats(const TiltStats& stats);
TiltStats ParseStats(std::string_view text);

}  // namespace effortlab::tilt

#pragma once

#include <span>
#include <string>
#include <vector>

#include "effortlab/tilt.hpp"
#include "effortlab/waveform.hpp"

namespace effortlab::effort {

// Offset on the normalized tilt scale; one unit is 3 sigma of raw tilt.
struct EffortTarget {
  double bias = 0.0;
  tilt::TiltStats stats;
};

struct ControlConfig {
  int max_iterations = 20;
  double tolerance = 0.1;          // normalized units; looser means failure
  double refine_tolerance = 0.01;  // stop early once this close
  double max_coefficient = 0.999;
  tilt::TiltAnalysisConfig analysis;
};

struct EffortResult {
  Waveform output;
  double input_normalized = 0.0;
  double target_normalized = 0.0;
  double achieved_normalized = 0.0;
  double coefficient = 0.0;
  int iterations = 0;
};

// Tilt filter. coefficient >= 0 places a zero at z = c (flattens);
// coefficient < 0 places a double pole at z = -c (steepens).
Waveform ApplyTiltFilter(const Waveform& w, double coefficient);

// Shift the utterance's normalized tilt by target.bias, holding active
// speech level and length. Normalized values are on the unclipped linear
// scale. Throws kNoVoicing for unvoiced input and ConvergenceError (with the
// closest normalized tilt reached) when the target is out of reach.
EffortResult ApplyEffort(const Waveform& w, const EffortTarget& target,
                         const ControlConfig& config = {});

// Same controller aiming at an absolute normalized tilt.
EffortResult ApplyEffortAbsolute(const Waveform& w, double target_normalized,
                                 const tilt::TiltStats& stats, const ControlConfig& config = {});

struct ResponsePoint {
  double target_bias = 0.0;
  double measured_tilt = 0.0;  // normalized, unclipped
  bool converged = false;
  std::string error;
};

struct ResponseCurve {
  double input_tilt = 0.0;  // normalized, unclipped
  std::vector<ResponsePoint> points;
};

// Targets must be strictly increasing.
ResponseCurve MeasureResponseCurve(const Waveform& w, std::span<const double> targets,
                                   const tilt::TiltStats& stats, const ControlConfig& config = {});

// "target_bias,measured_tilt" header, one row per point.
std::string FormatResponseCsv(const ResponseCurve& curve);

}  // namespace effortlab::effort

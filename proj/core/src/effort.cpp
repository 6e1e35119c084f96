#include "effortlab/effort.hpp"

#include <cmath>
#include <cstdio>

#include "effortlab/error.hpp"
#include "effortlab/filters.hpp"
#include "effortlab/keyvalue.hpp"
#include "effortlab/level.hpp"

namespace effortlab::effort {

namespace {

double MeasureNormalized(const Waveform& w, const tilt::TiltStats& stats,
                         const tilt::TiltAnalysisConfig& analysis) {
  return stats.NormalizeLinear(tilt::UtteranceTiltValue(w, analysis));
}

Waveform MatchLevel(Waveform out, double reference_level_db) {
  const double level = noise::ActiveSpeechLevel(out);
  return Scaled(out, DbToAmplitude(reference_level_db - level));
}

}  // namespace

Waveform ApplyTiltFilter(const Waveform& w, double coefficient) {
  Validate(w);
  if (!(std::abs(coefficient) < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tilt filter coefficient must lie in (-1, 1)");
  }
  if (coefficient == 0.0) return w;
  if (coefficient > 0.0) {
    return Waveform(signal::FirstOrderSection(w.samples, coefficient, 0.0), w.sample_rate);
  }
  // A single pole stalls once the first formant dominates the spectrum;
  // a second pass keeps steepening until the fundamental takes over.
  auto once = signal::FirstOrderSection(w.samples, 0.0, -coefficient);
  return Waveform(signal::FirstOrderSection(once, 0.0, -coefficient), w.sample_rate);
}

EffortResult ApplyEffortAbsolute(const Waveform& w, double target_normalized,
                                 const tilt::TiltStats& stats, const ControlConfig& config) {
  tilt::CheckNonDegenerate(stats);
  if (!std::isfinite(target_normalized)) {
    throw Error(ErrorCode::kInvalidArgument, "effort target must be finite");
  }
  Validate(w);

  EffortResult result;
  result.input_normalized = MeasureNormalized(w, stats, config.analysis);
  result.target_normalized = target_normalized;
  const double input_level = noise::ActiveSpeechLevel(w);

  double best_error = result.input_normalized - target_normalized;
  double best_coefficient = 0.0;
  double best_measured = result.input_normalized;
  result.iterations = 0;

  auto evaluate = [&](double c) {
    ++result.iterations;
    const double measured = MeasureNormalized(ApplyTiltFilter(w, c), stats, config.analysis);
    const double error = measured - target_normalized;
    if (std::abs(error) < std::abs(best_error)) {
      best_error = error;
      best_coefficient = c;
      best_measured = measured;
    }
    return error;
  };

  if (std::abs(best_error) > config.refine_tolerance) {
    // Measured tilt rises with the coefficient; bracket on the side the
    // target lies and bisect.
    const bool flatten = best_error < 0.0;
    double lo = flatten ? 0.0 : -config.max_coefficient;
    double hi = flatten ? config.max_coefficient : 0.0;
    const double edge_error = evaluate(flatten ? hi : lo);
    const bool reachable = flatten ? edge_error >= 0.0 : edge_error <= 0.0;
    if (reachable) {
      while (result.iterations < config.max_iterations &&
             std::abs(best_error) > config.refine_tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (evaluate(mid) < 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
    }
  }

  if (std::abs(best_error) > config.tolerance) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "effort target %.3f not reached after %d iterations (best %.3f)",
                  target_normalized, result.iterations, best_measured);
    throw ConvergenceError(buf, best_measured);
  }
  result.coefficient = best_coefficient;
  result.achieved_normalized = best_measured;
  result.output = MatchLevel(ApplyTiltFilter(w, best_coefficient), input_level);
  return result;
}

EffortResult ApplyEffort(const Waveform& w, const EffortTarget& target, const ControlConfig& config) {
  tilt::CheckNonDegenerate(target.stats);
  if (!std::isfinite(target.bias)) throw Error(ErrorCode::kInvalidArgument, "bias must be finite");
  const double input = MeasureNormalized(w, target.stats, config.analysis);
  return ApplyEffortAbsolute(w, input + target.bias, target.stats, config);
}

ResponseCurve MeasureResponseCurve(const Waveform& w, std::span<const double> targets,
                                   const tilt::TiltStats& stats, const ControlConfig& config) {
  for (std::size_t i = 1; i < targets.size(); ++i) {
    if (!(targets[i] > targets[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "response-curve targets must be strictly increasing");
    }
  }
  tilt::CheckNonDegenerate(stats);
  ResponseCurve curve;
  curve.input_tilt = MeasureNormalized(w, stats, config.analysis);
  for (double bias : targets) {
    ResponsePoint point;
    point.target_bias = bias;
    try {
      const EffortResult r = ApplyEffortAbsolute(w, curve.input_tilt + bias, stats, config);
      point.measured_tilt = MeasureNormalized(r.output, stats, config.analysis);
      point.converged = true;
    } catch (const ConvergenceError& e) {
      point.measured_tilt = e.best_value();
      point.error = e.what();
    }
    curve.points.push_back(point);
  }
  return curve;
}

std::string FormatResponseCsv(const ResponseCurve& curve) {
  std::string out = "target_bias,measured_tilt\n";
  char buf[64];
  for (const ResponsePoint& p : curve.points) {
    std::snprintf(buf, sizeof buf, "%.4f,%.4f\n", p.target_bias, p.measured_tilt);
    out += buf;
  }
  return out;
}

}  // namespace effortlab::effort

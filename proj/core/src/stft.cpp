#include "effortlab/stft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "effortlab/error.hpp"
#include "effortlab/fft.hpp"

namespace effortlab::signal {

namespace {

constexpr double kColaTolerance = 1e-6;

struct FrameGeometry {
  int frame_length;
  int hop;
};

FrameGeometry Geometry(const StftConfig& config, int sample_rate) {
  const int frame = static_cast<int>(std::lround(config.frame_length_ms * sample_rate / 1000.0));
  const int hop = static_cast<int>(std::lround(config.hop_ms * sample_rate / 1000.0));
  if (frame < 2 || hop < 1) {
    throw Error(ErrorCode::kInvalidArgument, "STFT frame/hop too short for the sample rate");
  }
  if (hop > frame) {
    throw Error(ErrorCode::kInvalidArgument, "STFT hop must not exceed the frame length");
  }
  return {frame, hop};
}

StftGrid Analyze(const Waveform& w, const StftConfig& config, bool invertible) {
  Validate(w);
  const FrameGeometry g = Geometry(config, w.sample_rate);
  if (invertible) CheckCola(config.window, g.frame_length, g.hop);

  StftGrid grid;
  grid.frame_length_ms = config.frame_length_ms;
  grid.hop_ms = config.hop_ms;
  grid.window = config.window;
  grid.sample_rate = w.sample_rate;
  grid.frame_length = g.frame_length;
  grid.hop = g.hop;
  grid.signal_length = w.size();
  grid.invertible = invertible;
  grid.lead = invertible ? static_cast<std::size_t>(g.frame_length - g.hop) : 0;

  const std::size_t n_frames = FrameCount(w.size() + 2 * grid.lead, g.frame_length, g.hop);
  const std::vector<double> window = MakeWindow(config.window, g.frame_length);
  const Fft fft(g.frame_length);
  std::vector<double> buf(static_cast<std::size_t>(g.frame_length));
  grid.frames.reserve(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::size_t start = f * static_cast<std::size_t>(g.hop);
    for (int i = 0; i < g.frame_length; ++i) {
      const std::size_t idx = start + static_cast<std::size_t>(i);
      const bool inside = idx >= grid.lead && idx - grid.lead < w.size();
      buf[i] = inside ? w.samples[idx - grid.lead] * window[i] : 0.0;
    }
    grid.frames.push_back(fft.Forward(buf));
  }
  return grid;
}

}  // namespace

std::string_view ToString(WindowKind kind) {
  switch (kind) {
    case WindowKind::kHann: return "hann";
    case WindowKind::kSqrtHann: return "sqrt-hann";
    case WindowKind::kHamming: return "hamming";
    case WindowKind::kRectangular: return "rectangular";
  }
  return "unknown";
}

WindowKind ParseWindowKind(std::string_view name) {
  if (name == "hann") return WindowKind::kHann;
  if (name == "sqrt-hann") return WindowKind::kSqrtHann;
  if (name == "hamming") return WindowKind::kHamming;
  if (name == "rectangular" || name == "rect") return WindowKind::kRectangular;
  throw Error(ErrorCode::kInvalidArgument, "unknown window '" + std::string(name) + "'");
}

std::vector<double> MakeWindow(WindowKind kind, int length) {
  std::vector<double> w(static_cast<std::size_t>(length), 1.0);
  for (int i = 0; i < length; ++i) {
    const double phase = 2.0 * std::numbers::pi * i / length;
    switch (kind) {
      case WindowKind::kHann: w[i] = 0.5 - 0.5 * std::cos(phase); break;
      case WindowKind::kSqrtHann: w[i] = std::sqrt(0.5 - 0.5 * std::cos(phase)); break;
      case WindowKind::kHamming: w[i] = 0.54 - 0.46 * std::cos(phase); break;
      case WindowKind::kRectangular: break;
    }
  }
  return w;
}

std::size_t FrameCount(std::size_t length, int frame_length, int hop) {
  if (length == 0) return 0;
  const auto frame = static_cast<std::size_t>(frame_length);
  if (length <= frame) return 1;
  const auto h = static_cast<std::size_t>(hop);
  return (length - frame + h - 1) / h + 1;
}

double SquaredWindowOverlapSpread(std::span<const double> window, int hop) {
  if (hop <= 0) return 1.0;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int n = 0; n < hop; ++n) {
    double sum = 0.0;
    for (std::size_t i = static_cast<std::size_t>(n); i < window.size(); i += static_cast<std::size_t>(hop)) {
      sum += window[i] * window[i];
    }
    lo = std::min(lo, sum);
    hi = std::max(hi, sum);
  }
  return hi > 0.0 ? (hi - lo) / hi : 1.0;
}

void CheckCola(WindowKind kind, int frame_length, int hop) {
  const double spread = SquaredWindowOverlapSpread(MakeWindow(kind, frame_length), hop);
  if (spread > kColaTolerance) {
    throw Error(ErrorCode::kNotCola,
                "constant-overlap-add violated: squared " + std::string(ToString(kind)) +
                    " window of " + std::to_string(frame_length) + " samples at hop " +
                    std::to_string(hop) + " varies by " + std::to_string(spread) + " relative");
  }
}

StftGrid Stft(const Waveform& w, const StftConfig& config) { return Analyze(w, config, true); }

StftGrid AnalysisStft(const Waveform& w, const StftConfig& config) {
  return Analyze(w, config, false);
}

Waveform Istft(const StftGrid& grid) {
  if (!grid.invertible) {
    throw Error(ErrorCode::kInconsistentGrid, "grid was produced for analysis only");
  }
  if (grid.sample_rate <= 0 || grid.frame_length < 2 || grid.hop < 1) {
    throw Error(ErrorCode::kInconsistentGrid, "grid metadata is inconsistent");
  }
  if (grid.frames.size() != FrameCount(grid.signal_length + 2 * grid.lead, grid.frame_length, grid.hop)) {
    throw Error(ErrorCode::kInconsistentGrid, "frame count does not match signal length");
  }
  const auto bins = static_cast<std::size_t>(grid.n_bins());
  for (const auto& frame : grid.frames) {
    if (frame.size() != bins) {
      throw Error(ErrorCode::kInconsistentGrid, "frame has " + std::to_string(frame.size()) +
                                                    " bins, expected " + std::to_string(bins));
    }
  }

  const std::vector<double> window = MakeWindow(grid.window, grid.frame_length);
  const std::size_t padded =
      grid.frames.empty() ? 0
                          : (grid.frames.size() - 1) * static_cast<std::size_t>(grid.hop) +
                                static_cast<std::size_t>(grid.frame_length);
  std::vector<double> acc(padded, 0.0), norm(padded, 0.0);
  const Fft fft(grid.frame_length);
  std::vector<double> buf(static_cast<std::size_t>(grid.frame_length));
  for (std::size_t f = 0; f < grid.frames.size(); ++f) {
    fft.Inverse(grid.frames[f], buf);
    const std::size_t start = f * static_cast<std::size_t>(grid.hop);
    for (int i = 0; i < grid.frame_length; ++i) {
      acc[start + i] += buf[i] * window[i];
      norm[start + i] += window[i] * window[i];
    }
  }
  // Padding keeps signal samples on the constant overlap sum; dividing by
  // the actual sum also covers grids built without it.
  const double peak_norm = norm.empty() ? 0.0 : *std::max_element(norm.begin(), norm.end());
  std::vector<double> out(grid.signal_length, 0.0);
  for (std::size_t n = 0; n < out.size(); ++n) {
    const std::size_t k = n + grid.lead;
    if (k < norm.size() && norm[k] > 1e-10 * peak_norm) out[n] = acc[k] / norm[k];
  }
  return Waveform(std::move(out), grid.sample_rate);
}

}  // namespace effortlab::signal

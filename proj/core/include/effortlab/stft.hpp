#pragma once

#include <complex>
#include <span>
#include <string_view>
#include <vector>

#include "effortlab/waveform.hpp"

namespace effortlab::signal {

enum class WindowKind {
  kHann,        // periodic
  kSqrtHann,    // periodic; squares to kHann
  kHamming,     // periodic
  kRectangular,
};

std::string_view ToString(WindowKind kind);
WindowKind ParseWindowKind(std::string_view name);

std::vector<double> MakeWindow(WindowKind kind, int length);

struct StftConfig {
  double frame_length_ms = 32.0;
  double hop_ms = 16.0;
  WindowKind window = WindowKind::kSqrtHann;
};

// Complex spectra, one row per frame, bins = fft_size/2 + 1. fft_size
// equals the frame length in samples.
struct StftGrid {
  std::vector<std::vector<std::complex<double>>> frames;
  double frame_length_ms = 0.0;
  double hop_ms = 0.0;
  WindowKind window = WindowKind::kHann;
  int sample_rate = 0;
  int frame_length = 0;  // samples
  int hop = 0;           // samples
  std::size_t signal_length = 0;
  // Zero padding in front of the signal (and after it, for invertible
  // grids): frame f starts at sample f * hop - lead.
  std::size_t lead = 0;
  bool invertible = false;

  std::size_t n_frames() const noexcept { return frames.size(); }
  int fft_size() const noexcept { return frame_length; }
  int n_bins() const noexcept { return frame_length / 2 + 1; }
  double bin_hz() const noexcept { return static_cast<double>(sample_rate) / frame_length; }
};

// ceil((length - frame) / hop) + 1, and 1 for signals shorter than a frame.
std::size_t FrameCount(std::size_t length, int frame_length, int hop);

// Relative spread (max-min)/max of the summed squared window shifted by hop.
double SquaredWindowOverlapSpread(std::span<const double> window, int hop);

// Throws kNotCola if the squared-window overlap sum is not constant within
// 1e-6 relative.
void CheckCola(WindowKind kind, int frame_length, int hop);

// Invertible analysis; requires a COLA window/hop pair. The signal is
// padded by frame - hop zeros on both sides so every sample sits under a
// full overlap of frames.
StftGrid Stft(const Waveform& w, const StftConfig& config);

// Analysis for measurement only (any hop <= frame); the grid cannot be
// inverted.
StftGrid AnalysisStft(const Waveform& w, const StftConfig& config);

// Weighted overlap-add synthesis trimmed to the original signal length.
Waveform Istft(const StftGrid& grid);

}  // namespace effortlab::signal

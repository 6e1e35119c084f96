#include "effortlab/ltas.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "effortlab/error.hpp"
#include "effortlab/resample.hpp"
#include "effortlab/stft.hpp"

namespace effortlab::tilt {

std::vector<double> BandCenters(const LtasConfig& config) {
  if (config.bands_per_octave <= 0 || !(config.min_hz > 0.0) || !(config.max_hz > config.min_hz)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid LTAS band layout");
  }
  const double b = config.bands_per_octave;
  const double half_band = std::pow(2.0, 0.5 / b);
  const auto k_lo = static_cast<int>(std::ceil(b * std::log2(config.min_hz / half_band / 1000.0)));
  const auto k_hi = static_cast<int>(std::floor(b * std::log2(config.max_hz * half_band / 1000.0)));
  std::vector<double> centers;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double fc = 1000.0 * std::pow(2.0, k / b);
    if (fc >= config.min_hz / half_band && fc <= config.max_hz * half_band) centers.push_back(fc);
  }
  return centers;
}

PowerSpectrum WelchSpectrum(std::span<const Waveform> corpus, const LtasConfig& config) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyInput, "LTAS needs a non-empty corpus");
  const signal::StftConfig stft{config.frame_ms, config.hop_ms, signal::WindowKind::kHann};

  PowerSpectrum spectrum;
  spectrum.sample_rate = config.sample_rate;
  double window_power = 0.0;
  for (const Waveform& file : corpus) {
    const Waveform x = signal::Resample(file, config.sample_rate);
    if (x.empty()) continue;
    const signal::StftGrid grid = signal::AnalysisStft(x, stft);
    if (spectrum.psd.empty()) {
      spectrum.psd.assign(static_cast<std::size_t>(grid.n_bins()), 0.0);
      spectrum.bin_hz = grid.bin_hz();
      for (double v : signal::MakeWindow(signal::WindowKind::kHann, grid.frame_length)) {
        window_power += v * v;
      }
    }
    for (const auto& frame : grid.frames) {
      for (std::size_t k = 0; k < frame.size(); ++k) spectrum.psd[k] += std::norm(frame[k]);
    }
    spectrum.n_frames += grid.n_frames();
  }
  if (spectrum.n_frames == 0) throw Error(ErrorCode::kEmptyInput, "LTAS corpus has no samples");

  const std::size_t last = spectrum.psd.size() - 1;
  const double scale = 1.0 / (static_cast<double>(spectrum.n_frames) * config.sample_rate * window_power);
  for (std::size_t k = 0; k <= last; ++k) {
    const double one_sided = (k == 0 || k == last) ? 1.0 : 2.0;
    spectrum.psd[k] *= scale * one_sided;
  }
  return spectrum;
}

LtasCurve BandLevels(const PowerSpectrum& spectrum, const LtasConfig& config) {
  const std::vector<double> centers = BandCenters(config);
  const double half_band = std::pow(2.0, 0.5 / config.bands_per_octave);
  const double nyquist = 0.5 * spectrum.sample_rate;
  LtasCurve curve;
  curve.n_frames = spectrum.n_frames;
  for (double fc : centers) {
    if (fc > nyquist) break;
    const double lo = fc / half_band;
    const double hi = std::min(fc * half_band, nyquist);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < spectrum.psd.size(); ++k) {
      const double f = k * spectrum.bin_hz;
      if (f >= lo && f < hi) {
        sum += spectrum.psd[k];
        ++count;
      }
    }
    if (count == 0) {
      // Band narrower than a bin: use the nearest bin.
      const auto k = std::min(static_cast<std::size_t>(std::lround(fc / spectrum.bin_hz)),
                              spectrum.psd.size() - 1);
      sum = spectrum.psd[k];
      count = 1;
    }
    const double power = sum / static_cast<double>(count);
    curve.band_hz.push_back(fc);
    curve.band_power.push_back(power);
    curve.level_db.push_back(PowerToDb(power));
  }
  return curve;
}

LtasCurve Ltas(std::span<const Waveform> corpus, const LtasConfig& config) {
  return BandLevels(WelchSpectrum(corpus, config), config);
}

LtasCurve MergeLtas(std::span<const LtasCurve> curves) {
  if (curves.empty()) throw Error(ErrorCode::kEmptyInput, "nothing to merge");
  LtasCurve merged;
  merged.band_hz = curves.front().band_hz;
  merged.band_power.assign(merged.band_hz.size(), 0.0);
  for (const LtasCurve& c : curves) {
    if (c.band_hz != merged.band_hz) {
      throw Error(ErrorCode::kInvalidArgument, "LTAS curves use different bands");
    }
    for (std::size_t i = 0; i < c.band_power.size(); ++i) {
      merged.band_power[i] += c.band_power[i] * static_cast<double>(c.n_frames);
    }
    merged.n_frames += c.n_frames;
  }
  if (merged.n_frames == 0) throw Error(ErrorCode::kEmptyInput, "LTAS curves hold no frames");
  for (double& p : merged.band_power) p /= static_cast<double>(merged.n_frames);
  for (double p : merged.band_power) merged.level_db.push_back(PowerToDb(p));
  return merged;
}

double MeanLevelDb(const LtasCurve& curve, double lo_hz, double hi_hz) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < curve.band_hz.size(); ++i) {
    if (curve.band_hz[i] >= lo_hz && curve.band_hz[i] <= hi_hz) {
      sum += curve.level_db[i];
      ++n;
    }
  }
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "no LTAS bands in the requested range");
  return sum / static_cast<double>(n);
}

}  // namespace effortlab::tilt

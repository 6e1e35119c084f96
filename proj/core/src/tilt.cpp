#include "effortlab/tilt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "effortlab/error.hpp"
#include "effortlab/filters.hpp"
#include "effortlab/keyvalue.hpp"
#include "effortlab/resample.hpp"

namespace effortlab::tilt {

namespace {

struct Frames {
  int length = 0;
  int hop = 0;
  std::size_t count = 0;
};

Frames FrameLayout(std::size_t n, int sample_rate, const TiltAnalysisConfig& config) {
  Frames f;
  f.length = static_cast<int>(std::lround(config.frame_ms * sample_rate / 1000.0));
  f.hop = static_cast<int>(std::lround(config.hop_ms * sample_rate / 1000.0));
  if (f.length < 2 || f.hop < 1) {
    throw Error(ErrorCode::kInvalidArgument, "tilt analysis frame/hop too short");
  }
  const auto len = static_cast<std::size_t>(f.length);
  if (n == 0) {
    f.count = 0;
  } else if (n <= len) {
    f.count = 1;
  } else {
    f.count = (n - len) / static_cast<std::size_t>(f.hop) + 1;
  }
  return f;
}

double Median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

double VoicingProbability(std::span<const double> frame, int sample_rate,
                          const VoicingConfig& config) {
  if (sample_rate <= 0) throw Error(ErrorCode::kInvalidArgument, "sample rate must be positive");
  const auto n = static_cast<int>(frame.size());
  if (n * 1000 < 25 * sample_rate) {
    throw Error(ErrorCode::kInvalidArgument, "voicing frame must span at least 25 ms");
  }
  const double mean = std::accumulate(frame.begin(), frame.end(), 0.0) / n;
  std::vector<double> x(frame.begin(), frame.end());
  double energy = 0.0;
  for (double& v : x) {
    v -= mean;
    energy += v * v;
  }
  if (!(energy > 1e-20)) return 0.0;

  const int min_lag = std::max(1, static_cast<int>(std::floor(sample_rate / config.max_f0_hz)));
  // Keep at least half the frame overlapping so long lags do not produce
  // spurious peaks on noise.
  const int max_lag = std::min(static_cast<int>(std::ceil(sample_rate / config.min_f0_hz)), n / 2);

  // Prefix sums of x^2 give both overlap energies in O(1) per lag.
  std::vector<double> cumulative(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 0; i < n; ++i) cumulative[i + 1] = cumulative[i] + x[i] * x[i];

  double peak = 0.0;
  for (int lag = min_lag; lag <= max_lag; ++lag) {
    double r = 0.0;
    for (int i = 0; i + lag < n; ++i) r += x[i] * x[i + lag];
    const double e0 = cumulative[n - lag];
    const double e1 = cumulative[n] - cumulative[lag];
    if (e0 <= 0.0 || e1 <= 0.0) continue;
    peak = std::max(peak, r / std::sqrt(e0 * e1));
  }
  const double p = (peak - config.corr_floor) / (config.corr_ceiling - config.corr_floor);
  return std::clamp(p, 0.0, 1.0);
}

double FrameTilt(std::span<const double> frame) {
  double r0 = 0.0, r1 = 0.0;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    r0 += frame[i] * frame[i];
    if (i + 1 < frame.size()) r1 += frame[i] * frame[i + 1];
  }
  if (!(r0 > 0.0) || !std::isfinite(r0)) {
    throw Error(ErrorCode::kUndefinedTilt, "spectral tilt is undefined for a zero-energy frame");
  }
  return -r1 / r0;
}

Waveform PrepareForAnalysis(const Waveform& w, const TiltAnalysisConfig& config) {
  Validate(w);
  Waveform x = signal::Resample(w, config.analysis_rate);
  if (config.highpass_hz > 0.0 && !x.empty()) x = signal::Highpass(x, config.highpass_hz);
  return x;
}

UtteranceTilt AnalyzeUtterance(const Waveform& w, const TiltAnalysisConfig& config) {
  const Waveform x = PrepareForAnalysis(w, config);
  const Frames layout = FrameLayout(x.size(), x.sample_rate, config);
  const auto len = static_cast<std::size_t>(layout.length);

  std::vector<double> padded_tail;
  auto frame_at = [&](std::size_t f) -> std::span<const double> {
    const std::size_t start = f * static_cast<std::size_t>(layout.hop);
    if (start + len <= x.size()) return std::span<const double>(x.samples).subspan(start, len);
    padded_tail.assign(len, 0.0);
    std::copy(x.samples.begin() + static_cast<std::ptrdiff_t>(start), x.samples.end(),
              padded_tail.begin());
    return padded_tail;
  };

  std::vector<double> rms(layout.count, 0.0);
  for (std::size_t f = 0; f < layout.count; ++f) rms[f] = Rms(frame_at(f));
  const double loudest = rms.empty() ? 0.0 : *std::max_element(rms.begin(), rms.end());
  const double rms_floor = loudest * DbToAmplitude(config.voicing.relative_floor_db);

  UtteranceTilt result;
  result.total_frames = layout.count;
  double sum = 0.0;
  for (std::size_t f = 0; f < layout.count; ++f) {
    if (!(rms[f] > 0.0)) continue;
    const auto frame = frame_at(f);
    if (!config.force_voiced) {
      if (rms[f] < rms_floor) continue;
      if (VoicingProbability(frame, x.sample_rate, config.voicing) <= 0.5) continue;
    }
    sum += FrameTilt(frame);
    ++result.voiced_frames;
  }
  if (result.voiced_frames == 0) {
    throw Error(ErrorCode::kNoVoicing, "no voiced frames found in utterance");
  }
  result.tilt = sum / static_cast<double>(result.voiced_frames);
  return result;
}

double UtteranceTiltValue(const Waveform& w, const TiltAnalysisConfig& config) {
  return AnalyzeUtterance(w, config).tilt;
}

TiltStats TiltStats::FromMedianSigma(double median, double sigma, std::size_t n) {
  TiltStats s;
  s.median = median;
  s.sigma = sigma;
  s.lo = median - 3.0 * sigma;
  s.hi = median + 3.0 * sigma;
  s.n_utterances = n;
  return s;
}

TiltStats TiltStats::FromRange(double lo, double hi) {
  if (!(hi > lo)) throw Error(ErrorCode::kDegenerateStats, "tilt range needs lo < hi");
  TiltStats s;
  s.lo = lo;
  s.hi = hi;
  s.median = 0.5 * (lo + hi);
  s.sigma = (hi - lo) / 6.0;
  return s;
}

// Each half of the scale is divided by its own span so that lo, median and
// hi map to exactly -1, 0 and +1 in floating point.
double TiltStats::NormalizeLinear(double raw) const {
  return raw >= median ? (raw - median) / (hi - median) : (raw - median) / (median - lo);
}

double TiltStats::Normalize(double raw) const {
  return std::clamp(NormalizeLinear(raw), -1.0, 1.0);
}

double TiltStats::Denormalize(double normalized) const {
  return normalized >= 0.0 ? median + normalized * (hi - median)
                           : median + normalized * (median - lo);
}

void CheckNonDegenerate(const TiltStats& stats) {
  if (!std::isfinite(stats.median) || !std::isfinite(stats.sigma) || !(stats.sigma > 0.0) ||
      !(stats.hi > stats.median) || !(stats.median > stats.lo)) {
    throw Error(ErrorCode::kDegenerateStats, "tilt statistics are degenerate (sigma = " +
                                                 FormatDouble(stats.sigma) + ")");
  }
}

TiltStats FitNormalizer(std::span<const double> corpus_tilts) {
  if (corpus_tilts.size() < 2) {
    throw Error(ErrorCode::kDegenerateStats, "need at least two utterance tilts");
  }
  if (!AllFinite(corpus_tilts)) throw Error(ErrorCode::kNonFinite, "non-finite tilt value");
  const double n = static_cast<double>(corpus_tilts.size());
  const double mean = std::accumulate(corpus_tilts.begin(), corpus_tilts.end(), 0.0) / n;
  double ss = 0.0;
  for (double t : corpus_tilts) ss += (t - mean) * (t - mean);
  const double sigma = std::sqrt(ss / (n - 1.0));
  const auto [lo, hi] = std::minmax_element(corpus_tilts.begin(), corpus_tilts.end());
  if (*lo == *hi || !(sigma > 0.0)) {
    throw Error(ErrorCode::kDegenerateStats, "all utterance tilts are identical");
  }
  const std::vector<double> values(corpus_tilts.begin(), corpus_tilts.end());
  TiltStats stats = TiltStats::FromMedianSigma(Median(values), sigma, corpus_tilts.size());
  CheckNonDegenerate(stats);
  return stats;
}

double NormalizeTilt(double raw, const TiltStats& stats) {
  CheckNonDegenerate(stats);
  return stats.Normalize(raw);
}

std::string FormatStats(const TiltStats& stats) {
  std::string out;
  out += "median = " + FormatDouble(stats.median) + "\n";
  out += "sigma = " + FormatDouble(stats.sigma) + "\n";
  out += "lo = " + FormatDouble(stats.lo) + "\n";
  out += "hi = " + FormatDouble(stats.hi) + "\n";
  out += "n_utterances = " + std::to_string(stats.n_utterances) + "\n";
  return out;
}

TiltStats ParseStats(std::string_view text) {
  const auto kv = ParseKeyValue(text);
  auto get = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      throw Error(ErrorCode::kFormat, std::string("stats file is missing '") + key + "'");
    }
    return it->second;
  };
  TiltStats s;
  s.median = ParseDouble(get("median"), "median");
  s.sigma = ParseDouble(get("sigma"), "sigma");
  s.lo = kv.count("lo") ? ParseDouble(get("lo"), "lo") : s.median - 3.0 * s.sigma;
  s.hi = kv.count("hi") ? ParseDouble(get("hi"), "hi") : s.median + 3.0 * s.sigma;
  if (kv.count("n_utterances")) {
    s.n_utterances = static_cast<std::size_t>(ParseInteger(get("n_utterances"), "n_utterances"));
  }
  CheckNonDegenerate(s);
  return s;
}

}  // namespace effortlab::tilt

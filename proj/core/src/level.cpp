#include "effortlab/level.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "effortlab/error.hpp"

namespace effortlab::noise {

namespace {

struct Activity {
  std::size_t count = 0;
  double level_db = 0.0;
};

class ThresholdSearch {
 public:
  ThresholdSearch(const Waveform& w, const ActiveLevelConfig& config)
      : hangover_(static_cast<std::size_t>(std::lround(config.hangover_s * w.sample_rate))) {
    const double g = std::exp(-1.0 / (config.time_constant_s * w.sample_rate));
    envelope_.resize(w.size());
    double p = 0.0, q = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) {
      const double x = w.samples[n];
      p = g * p + (1.0 - g) * std::abs(x);
      q = g * q + (1.0 - g) * p;
      envelope_[n] = q;
      energy_ += x * x;
    }
  }

  double energy() const { return energy_; }
  double max_envelope() const {
    return envelope_.empty() ? 0.0 : *std::max_element(envelope_.begin(), envelope_.end());
  }

  Activity At(double threshold_db) const {
    const double c = std::pow(10.0, threshold_db / 20.0);
    Activity a;
    std::size_t hold = hangover_;
    for (double q : envelope_) {
      if (q >= c) {
        ++a.count;
        hold = 0;
      } else if (hold < hangover_) {
        ++a.count;
        ++hold;
      }
    }
    a.level_db = a.count > 0 ? 10.0 * std::log10(energy_ / static_cast<double>(a.count))
                             : std::numeric_limits<double>::infinity();
    return a;
  }

 private:
  std::size_t hangover_;
  std::vector<double> envelope_;
  double energy_ = 0.0;
};

}  // namespace

ActiveLevel MeasureActiveLevel(const Waveform& w, const ActiveLevelConfig& config) {
  Validate(w);
  const ThresholdSearch search(w, config);
  if (!(search.energy() > 0.0) || !(search.max_envelope() > 0.0)) {
    throw Error(ErrorCode::kNoActivity, "signal is silent; active level undefined");
  }
  const double n = static_cast<double>(w.size());
  ActiveLevel result;
  result.long_term_db = 10.0 * std::log10(search.energy() / n);

  auto excess = [&](double threshold_db, Activity& a) {
    a = search.At(threshold_db);
    return a.level_db - threshold_db;
  };

  // Scan upward from far below the envelope peak for the first threshold
  // whose active level is within the margin, then bisect.
  const double top = 20.0 * std::log10(search.max_envelope());
  constexpr double kStep = 1.0;
  double below = top - 120.0;
  Activity a_below, a_above;
  double d_below = excess(below, a_below);
  double above = below;
  bool found = d_below <= config.margin_db;
  while (!found && above < top) {
    below = above;
    above = std::min(top, above + kStep);
    if (excess(above, a_above) <= config.margin_db) {
      found = true;
    }
  }
  if (!found) {
    throw Error(ErrorCode::kNoActivity, "no activity threshold satisfies the P.56 margin");
  }
  if (above != below) {
    while (above - below > config.search_tolerance_db) {
      const double mid = 0.5 * (above + below);
      Activity a_mid;
      if (excess(mid, a_mid) <= config.margin_db) {
        above = mid;
        a_above = a_mid;
      } else {
        below = mid;
      }
    }
  } else {
    a_above = a_below;
  }
  result.threshold_db = above;
  result.level_db = a_above.level_db;
  result.activity = static_cast<double>(a_above.count) / n;
  return result;
}

double ActiveSpeechLevel(const Waveform& w, const ActiveLevelConfig& config) {
  return MeasureActiveLevel(w, config).level_db;
}

}  // namespace effortlab::noise

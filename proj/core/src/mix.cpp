#include "effortlab/mix.hpp"

#include <cmath>
#include <string>

#include "effortlab/error.hpp"
#include "effortlab/file_util.hpp"
#include "effortlab/level.hpp"
#include "effortlab/resample.hpp"

namespace effortlab::noise {

void Validate(const MixRecipe& recipe) {
  if (!std::isfinite(recipe.snr_db)) throw Error(ErrorCode::kInvalidArgument, "SNR must be finite");
  if (!(recipe.lead_s >= 0.0) || !(recipe.lag_s >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lead and lag must be non-negative");
  }
}

MixResult MixAtSnr(const Waveform& target, const Waveform& masker_in, const MixRecipe& recipe,
                   std::size_t masker_offset) {
  Validate(recipe);
  Validate(target);
  Validate(masker_in);
  const int rate = target.sample_rate;
  const Waveform masker = signal::Resample(masker_in, rate);

  Waveform clean = target;
  if (recipe.target_level_db) {
    const double level = ActiveSpeechLevel(clean);
    clean = Scaled(clean, DbToAmplitude(*recipe.target_level_db - level));
  }
  const double target_level = ActiveSpeechLevel(clean);

  const auto lead = static_cast<std::size_t>(std::lround(recipe.lead_s * rate));
  const auto lag = static_cast<std::size_t>(std::lround(recipe.lag_s * rate));
  const std::size_t total = lead + clean.size() + lag;
  if (masker_offset > masker.size() || masker.size() - masker_offset < total) {
    throw Error(ErrorCode::kMaskerTooShort,
                "masker has " + std::to_string(masker.size()) + " samples after offset " +
                    std::to_string(masker_offset) + ", mixture needs " + std::to_string(total));
  }
  const std::span<const double> segment =
      std::span<const double>(masker.samples).subspan(masker_offset, total);
  const double masker_rms = Rms(segment);
  if (!(masker_rms > 0.0)) throw Error(ErrorCode::kNoActivity, "masker segment is silent");

  MixResult mix;
  mix.target_offset = lead;
  mix.target_length = clean.size();
  mix.masker_gain = DbToAmplitude(target_level - recipe.snr_db) / masker_rms;

  mix.target_component = Waveform(std::vector<double>(total, 0.0), rate);
  std::copy(clean.samples.begin(), clean.samples.end(),
            mix.target_component.samples.begin() + static_cast<std::ptrdiff_t>(lead));
  mix.masker_component = Waveform(std::vector<double>(total), rate);
  for (std::size_t i = 0; i < total; ++i) mix.masker_component.samples[i] = mix.masker_gain * segment[i];

  mix.mixture = Waveform(std::vector<double>(total), rate);
  for (std::size_t i = 0; i < total; ++i) {
    mix.mixture.samples[i] = mix.target_component.samples[i] + mix.masker_component.samples[i];
  }
  mix.peak = PeakAbs(mix.mixture.samples);
  if (mix.peak > 1.0 && recipe.headroom) {
    // 0.99 full scale keeps 16-bit rounding away from saturation.
    mix.headroom_gain = 0.99 / mix.peak;
    for (Waveform* w : {&mix.mixture, &mix.target_component, &mix.masker_component}) {
      for (double& v : w->samples) v *= mix.headroom_gain;
    }
    mix.masker_gain *= mix.headroom_gain;
    mix.peak = PeakAbs(mix.mixture.samples);
  }
  mix.clipped = mix.peak > 1.0;
  return mix;
}

double MeasureSnr(const MixResult& mix) {
  const auto& t = mix.target_component.samples;
  Waveform target(std::vector<double>(t.begin() + static_cast<std::ptrdiff_t>(mix.target_offset),
                                      t.begin() + static_cast<std::ptrdiff_t>(mix.target_offset +
                                                                               mix.target_length)),
                  mix.target_component.sample_rate);
  return ActiveSpeechLevel(target) - PowerToDb(MeanSquare(mix.masker_component.samples));
}

std::size_t MaskerOffsetForTrial(std::string_view trial_id, std::size_t masker_length,
                                 std::size_t needed, std::uint64_t seed) {
  if (masker_length < needed) {
    throw Error(ErrorCode::kMaskerTooShort, "masker shorter than the mixture");
  }
  const std::uint64_t h = Fnv1a64(trial_id, Fnv1a64(std::to_string(seed)));
  return static_cast<std::size_t>(h % (masker_length - needed + 1));
}

}  // namespace effortlab::noise

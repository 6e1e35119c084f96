#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "effortlab/waveform.hpp"

namespace effortlab::noise {

enum class MaskerKind { kCompetingSpeaker, kSpeechShapedNoise };

std::string_view ToString(MaskerKind kind);
MaskerKind ParseMaskerKind(std::string_view name);

struct MaskerSpec {
  MaskerKind kind = MaskerKind::kSpeechShapedNoise;
  std::vector<std::string> sources;  // corpus files
  int lp_order = 20;                 // SSN only
  std::uint64_t seed = 0;            // SSN only
};

// Throws kInvalidArgument when the spec violates its invariants.
void Validate(const MaskerSpec& spec);

struct LpcFit {
  std::vector<double> coefficients;  // a[1..p] of A(z) = 1 + sum a_k z^-k
  double prediction_error = 0.0;
};

// Levinson-Durbin on autocorrelation lags r[0..order].
LpcFit LevinsonDurbin(std::span<const double> autocorrelation, int order);

// Power of the all-pole model g^2 / |A(e^jw)|^2 at frequency_hz.
double LpcPowerResponse(const LpcFit& fit, double frequency_hz, int sample_rate);

struct SsnConfig {
  int lp_order = 20;
  std::uint64_t seed = 0;
  double duration_s = 10.0;
  int sample_rate = 16000;
  double rms_db = -26.0;
};

// LP fit of the corpus long-term spectrum; the fit comes from the
// autocorrelation implied by the Welch PSD.
LpcFit FitCorpusSpectrum(std::span<const Waveform> reference, int lp_order, int sample_rate);

// White Gaussian noise shaped by the corpus LP envelope. Deterministic for a
// given seed. Throws kEmptyInput for an empty corpus.
Waveform MakeSpeechShapedNoise(std::span<const Waveform> reference, const SsnConfig& config);

}  // namespace effortlab::noise

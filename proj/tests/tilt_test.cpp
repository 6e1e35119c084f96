#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "effortlab/error.hpp"
#include "effortlab/filters.hpp"
#include "effortlab/ltas.hpp"
#include "effortlab/resample.hpp"
#include "effortlab/tilt.hpp"
#include "support.hpp"

using namespace effortlab;
using namespace effortlab::tilt;
using namespace testing_support;

namespace {

// Periodic pulse train through 1/(1 - pole z^-1): voiced, with an AR(1)
// spectral envelope.
Waveform VoicedAr1(double pole, double f0, double seconds) {
  const int rate = 16000;
  std::vector<double> x(static_cast<std::size_t>(seconds * rate));
  const double period = rate / f0;
  double next = 0.0, y = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    double e = 0.0;
    if (static_cast<double>(n) >= next) {
      e = 0.05;
      next += period;
    }
    y = pole * y + e;
    x[n] = y;
  }
  return Waveform(std::move(x), rate);
}

TiltAnalysisConfig Plain() {
  TiltAnalysisConfig c;
  c.highpass_hz = 0.0;
  c.force_voiced = true;
  return c;
}

}  // namespace

TEST(Voicing, PulseTrainIsVoiced) {
  const Waveform w = VoicedAr1(0.7, 120.0, 0.1);
  EXPECT_GT(VoicingProbability(Slice(w, 400, 400), 16000), 0.8);
}

TEST(Voicing, NoiseIsNotVoiced) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Waveform w = WhiteNoise(0.025, 0.1, seed);
    EXPECT_LT(VoicingProbability(w.samples, 16000), 0.3) << seed;
  }
}

TEST(Voicing, SilenceAndShortFrames) {
  EXPECT_EQ(VoicingProbability(std::vector<double>(400, 0.0), 16000), 0.0);
  EXPECT_THROW(VoicingProbability(std::vector<double>(399, 0.1), 16000), Error);
}

TEST(FrameTilt, Ar1ClosedForm) {
  // For AR(1), r(1)/r(0) equals the pole, so the tilt is -pole.
  const Waveform w = Ar1(0.95, 4.0, 7);
  EXPECT_NEAR(FrameTilt(w.samples), -0.95, 0.02);
}

TEST(FrameTilt, WhiteNoiseNearZero) {
  EXPECT_NEAR(FrameTilt(WhiteNoise(1.0, 0.1, 9).samples), 0.0, 0.05);
}

TEST(FrameTilt, LowPassVoicedFrameIsSteep) {
  const Waveform& w = DeskCorpus()[0];
  // A frame from the loudest region.
  std::size_t best = 0;
  double best_rms = 0.0;
  for (std::size_t s = 0; s + 400 < w.size(); s += 160) {
    const double r = PlainRms(Slice(w, s, 400));
    if (r > best_rms) {
      best_rms = r;
      best = s;
    }
  }
  const double t = FrameTilt(Slice(w, best, 400));
  EXPECT_GE(t, -1.0);
  EXPECT_LE(t, -0.9);
}

TEST(FrameTilt, ZeroFrameUndefined) {
  try {
    FrameTilt(std::vector<double>(400, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUndefinedTilt);
  }
}

TEST(UtteranceTilt, ForcedVoicingAr1) {
  for (double pole : {0.5, 0.9}) {
    EXPECT_NEAR(UtteranceTiltValue(Ar1(pole, 2.0, 21), Plain()), -pole, 0.02) << pole;
  }
}

TEST(UtteranceTilt, HighPassedMatchesGlobalAutocorrelation) {
  // With the high-pass on, the per-frame average should agree with the
  // lag-one autocorrelation ratio of the whole high-passed signal.
  const Waveform w = Ar1(0.9, 2.0, 5);
  TiltAnalysisConfig c;
  c.force_voiced = true;
  const Waveform hp = signal::Highpass(w, c.highpass_hz);
  double r0 = 0.0, r1 = 0.0;
  for (std::size_t i = 0; i + 1 < hp.size(); ++i) {
    r0 += hp.samples[i] * hp.samples[i];
    r1 += hp.samples[i] * hp.samples[i + 1];
  }
  EXPECT_NEAR(UtteranceTiltValue(w, c), -r1 / r0, 0.01);
}

TEST(UtteranceTilt, UnvoicedSegmentExcluded) {
  Waveform voiced = VoicedAr1(0.95, 120.0, 1.0);
  const double voiced_rms = PlainRms(voiced.samples);
  const Waveform noise = WhiteNoise(1.0, voiced_rms, 4);
  std::vector<double> both = voiced.samples;
  both.insert(both.end(), noise.samples.begin(), noise.samples.end());
  TiltAnalysisConfig c;
  c.highpass_hz = 0.0;
  const UtteranceTilt r = AnalyzeUtterance(Waveform(both, 16000), c);
  EXPECT_NEAR(r.tilt, -0.95, 0.03);
  EXPECT_LT(r.voiced_frames, r.total_frames / 2 + 2);
}

TEST(UtteranceTilt, RateIndependent) {
  synth::VoiceParams v = synth::Voice(1);
  v.sample_rate = 24000;
  const Waveform at24 = synth::Synthesize(HarvardLines()[3], v, 3);
  const Waveform at16 = signal::Resample(at24, 16000);
  EXPECT_NEAR(UtteranceTiltValue(at24), UtteranceTiltValue(at16), 0.01);
}

TEST(UtteranceTilt, SilenceHasNoVoicing) {
  try {
    UtteranceTiltValue(Waveform(std::vector<double>(16000, 0.0), 16000));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoVoicing);
  }
}

TEST(UtteranceTilt, DeskCorpusInPublishedRange) {
  for (const Waveform& w : DeskCorpus()) {
    const double t = UtteranceTiltValue(w);
    EXPECT_GT(t, -1.0);
    EXPECT_LT(t, -0.9);
  }
}

TEST(Normalizer, VoiceOneRange) {
  const TiltStats s = TiltStats::FromRange(-0.984, -0.926);
  EXPECT_NEAR(s.median, -0.955, 1e-12);
  EXPECT_NEAR(3.0 * s.sigma, 0.029, 1e-12);
  EXPECT_DOUBLE_EQ(NormalizeTilt(-0.984, s), -1.0);
  EXPECT_DOUBLE_EQ(NormalizeTilt(-0.926, s), 1.0);
  EXPECT_DOUBLE_EQ(NormalizeTilt(s.median, s), 0.0);
}

TEST(Normalizer, SampleSigma) {
  const std::vector<double> v{-1.0, 0.0, 1.0};
  const TiltStats s = FitNormalizer(v);
  EXPECT_DOUBLE_EQ(s.median, 0.0);
  EXPECT_DOUBLE_EQ(s.sigma, 1.0);
  EXPECT_EQ(s.n_utterances, 3u);
}

TEST(Normalizer, TranslationEquivariant) {
  const std::vector<double> v{-0.97, -0.95, -0.96, -0.93, -0.99, -0.94};
  std::vector<double> shifted;
  for (double x : v) shifted.push_back(x + 0.25);
  const TiltStats a = FitNormalizer(v), b = FitNormalizer(shifted);
  EXPECT_NEAR(b.median - a.median, 0.25, 1e-12);
  EXPECT_NEAR(b.sigma, a.sigma, 1e-12);
}

TEST(Normalizer, ClipsBeyondThreeSigma) {
  const TiltStats s = TiltStats::FromMedianSigma(-0.95, 0.01);
  EXPECT_DOUBLE_EQ(NormalizeTilt(-0.95 + 0.05, s), 1.0);
  EXPECT_DOUBLE_EQ(NormalizeTilt(-0.95 - 0.05, s), -1.0);
  EXPECT_NEAR(s.NormalizeLinear(-0.95 + 0.05), 5.0 / 3.0, 1e-12);
  EXPECT_NEAR(s.Denormalize(s.NormalizeLinear(-0.91)), -0.91, 1e-12);
}

TEST(Normalizer, DegenerateRejected) {
  const std::vector<double> same{-0.95, -0.95, -0.95};
  EXPECT_THROW(FitNormalizer(same), Error);
  EXPECT_THROW(NormalizeTilt(-0.9, TiltStats::FromMedianSigma(-0.95, 0.0)), Error);
  EXPECT_THROW(NormalizeTilt(-0.9, TiltStats::FromMedianSigma(-0.95, std::nan(""))), Error);
}

TEST(Normalizer, StatsRoundTrip) {
  const TiltStats s = TiltStats::FromMedianSigma(-0.9468, 0.0059, 20);
  const TiltStats t = ParseStats(FormatStats(s));
  EXPECT_EQ(t.median, s.median);
  EXPECT_EQ(t.sigma, s.sigma);
  EXPECT_EQ(t.lo, s.lo);
  EXPECT_EQ(t.hi, s.hi);
  EXPECT_EQ(t.n_utterances, 20u);
  EXPECT_THROW(ParseStats("median = x\n"), Error);
}

TEST(Ltas, WhiteNoiseIsFlat) {
  std::vector<Waveform> corpus{WhiteNoise(5.0, 0.1, 1), WhiteNoise(5.0, 0.1, 2)};
  const LtasCurve c = Ltas(corpus);
  const double mean = MeanLevelDb(c, 100.0, 7000.0);
  for (std::size_t i = 0; i < c.band_hz.size(); ++i) {
    if (c.band_hz[i] >= 100.0 && c.band_hz[i] <= 7000.0) EXPECT_NEAR(c.level_db[i], mean, 1.0) << c.band_hz[i];
  }
}

TEST(Ltas, TonePeaksInOneBand) {
  std::vector<Waveform> corpus{Sine(1000.0, 2.0, 0.3)};
  const LtasCurve c = Ltas(corpus);
  std::size_t peak = 0;
  for (std::size_t i = 0; i < c.level_db.size(); ++i) {
    if (c.level_db[i] > c.level_db[peak]) peak = i;
  }
  EXPECT_NEAR(c.band_hz[peak], 1000.0, 60.0);
  ASSERT_GT(peak, 0u);
  ASSERT_LT(peak + 1, c.level_db.size());
  EXPECT_GE(c.level_db[peak] - c.level_db[peak - 1], 20.0);
  EXPECT_GE(c.level_db[peak] - c.level_db[peak + 1], 20.0);
}

TEST(Ltas, EmptyCorpusRejected) {
  EXPECT_THROW(Ltas(std::vector<Waveform>{}), Error);
}

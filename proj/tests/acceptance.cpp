// Prints one PASS/FAIL line per acceptance criterion; exits nonzero on any
// failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "effortlab/effort.hpp"
#include "effortlab/enhance.hpp"
#include "effortlab/file_util.hpp"
#include "effortlab/level.hpp"
#include "effortlab/ltas.hpp"
#include "effortlab/mix.hpp"
#include "effortlab/noise.hpp"
#include "effortlab/scoring.hpp"
#include "effortlab/service.hpp"
#include "effortlab/stimuli.hpp"
#include "effortlab/tilt.hpp"
#include "effortlab/transcript.hpp"
#include "plan_fixture.hpp"
#include "support.hpp"

using namespace effortlab;
using namespace testing_support;
using tilt::Ltas;
using tilt::LtasCurve;
using tilt::MeanLevelDb;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void Report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

template <typename... A>
std::string Fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

double Seconds(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Run a criterion, turning an unexpected exception into a failure line.
void Criterion(const char* name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    Report(name, false, std::string("exception: ") + e.what());
  }
}

void TiltAccuracy() {
  tilt::TiltAnalysisConfig c;
  c.highpass_hz = 0.0;
  c.force_voiced = true;
  double worst = 0.0, slowest = 0.0;
  for (double pole : {0.5, 0.7, 0.9, 0.95, 0.99}) {
    const Waveform w = Ar1(pole, 2.0, 11);
    double t = 0.0;
    slowest = std::max(slowest, Seconds([&] { t = tilt::UtteranceTiltValue(w, c); }));
    worst = std::max(worst, std::abs(t + pole));
  }
  Report("tilt-ar1", worst <= 0.02 && slowest < 1.0, Fmt("worst |tilt+pole| %.4f, slowest %.3f s", worst, slowest));
}

void NormalizationAnchors() {
  const tilt::TiltStats s = tilt::TiltStats::FromRange(-0.984, -0.926);
  const bool ok = tilt::NormalizeTilt(s.median, s) == 0.0 && tilt::NormalizeTilt(-0.984, s) == -1.0 &&
                  tilt::NormalizeTilt(-0.926, s) == 1.0 && tilt::NormalizeTilt(-0.90, s) == 1.0 &&
                  tilt::NormalizeTilt(-1.10, s) == -1.0;
  Report("normalization-anchors", ok, Fmt("M %.4f sigma %.6f", s.median, s.sigma));
}

void EffortSweep() {
  std::vector<double> tilts;
  for (const Waveform& w : DeskCorpus()) tilts.push_back(tilt::UtteranceTiltValue(w));
  const tilt::TiltStats stats = tilt::FitNormalizer(tilts);
  std::size_t mid = 0;
  for (std::size_t i = 0; i < tilts.size(); ++i) {
    if (std::abs(tilts[i] - stats.median) < std::abs(tilts[mid] - stats.median)) mid = i;
  }
  const std::vector<double> targets{-3, -2, -1, 0, 1, 2, 3};
  effort::ResponseCurve curve;
  const double secs =
      Seconds([&] { curve = effort::MeasureResponseCurve(DeskCorpus()[mid], targets, stats); });
  bool increasing = true;
  double worst = 0.0;
  int converged = 0;
  std::string points;
  for (std::size_t i = 0; i < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    if (i > 0 && !(p.measured_tilt > curve.points[i - 1].measured_tilt)) increasing = false;
    // Targets are absolute shifts from the input's normalized tilt.
    if (p.converged) {
      ++converged;
      worst = std::max(worst, std::abs(p.measured_tilt - (curve.input_tilt + p.target_bias)));
    }
    points += Fmt(" %+.2f%s", p.measured_tilt, p.converged ? "" : "*");
  }
  Report("effort-response", increasing && worst <= 0.25 && converged > 0 && secs < 30.0,
         Fmt("input %+.2f, measured%s, %d converged, worst %.3f, %.1f s", curve.input_tilt, points.c_str(),
             converged, worst, secs));
}

double ToneGainDb(double hz) {
  const Waveform in = Sine(hz, 1.0);
  const Waveform out = enhance::ApplyFixedStage(in);
  return Db(PlainRms(Slice(out, 4000, 8000)) / PlainRms(Slice(in, 4000, 8000)));
}

void FixedStage() {
  const double g700 = ToneGainDb(700.0);
  double worst_band = 0.0, worst_slope = 0.0;
  for (double f = 1000.0; f <= 4000.0 + 1e-9; f *= std::pow(2.0, 1.0 / 12.0)) {
    worst_band = std::max(worst_band, std::abs(ToneGainDb(f) - g700 - 12.0));
  }
  for (double f = 62.5; f <= 250.0 + 1e-9; f *= std::pow(2.0, 1.0 / 6.0)) {
    worst_slope = std::max(worst_slope, std::abs(ToneGainDb(2.0 * f) - ToneGainDb(f) - 6.0));
  }
  Report("ss-fixed-stage", worst_band <= 0.5 && worst_slope <= 0.5,
         Fmt("1-4 kHz worst dev %.3f dB, low slope worst dev %.3f dB", worst_band, worst_slope));
}

void LtasShape() {
  const auto& corpus = DeskCorpus();
  std::vector<Waveform> ss, ssdrc;
  for (const Waveform& w : corpus) {
    ss.push_back(enhance::SpectralShaping(w));
    ssdrc.push_back(enhance::Ssdrc(w));
  }
  const LtasCurve li = Ltas(corpus), ls = Ltas(ss), ld = Ltas(ssdrc);
  auto gain = [&](const LtasCurve& c, double lo, double hi) { return MeanLevelDb(c, lo, hi) - MeanLevelDb(li, lo, hi); };
  double level_dev = 0.0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const double ref = noise::ActiveSpeechLevel(corpus[i]);
    level_dev = std::max({level_dev, std::abs(noise::ActiveSpeechLevel(ss[i]) - ref),
                          std::abs(noise::ActiveSpeechLevel(ssdrc[i]) - ref)});
  }
  const double s_hi = gain(ls, 1000, 4000), s_lo = gain(ls, 50, 500);
  const double d_hi = gain(ld, 1000, 4000), d_lo = gain(ld, 50, 500);
  Report("ltas-shape", s_hi > 0 && s_lo < 0 && d_hi > 0 && d_lo < 0 && level_dev <= 0.1,
         Fmt("%zu utts; SS %+.1f/%+.1f dB, SSDRC %+.1f/%+.1f dB (1-4k/<500); level dev %.3f dB", corpus.size(),
             s_hi, s_lo, d_hi, d_lo, level_dev));
}

void DrcBehaviour() {
  const auto curve = enhance::IoecCurve::Default();
  double worst_gain = 0.0;
  for (double level : {-50.0, -40.0, -30.0, -20.0, -10.0}) {
    const Waveform t = Sine(1000.0, 1.0, std::pow(10.0, level / 20.0));
    const Waveform o = enhance::Drc(t);
    const double g = Db(PlainRms(Slice(o, 8000, 4000)) / PlainRms(Slice(t, 8000, 4000)));
    worst_gain = std::max(worst_gain, std::abs(g - curve.GainDb(level)));
  }
  double reduction = 0.0;
  for (const Waveform& w : DeskCorpus()) {
    reduction += 1.0 - enhance::EnvelopeDbStd(enhance::Drc(w), w) / enhance::EnvelopeDbStd(w, w);
  }
  reduction /= static_cast<double>(DeskCorpus().size());
  enhance::DrcConfig id;
  id.curve = enhance::IoecCurve::Identity();
  double identity = 0.0;
  for (const Waveform& w : DeskCorpus()) {
    const Waveform o = enhance::Drc(w, id);
    for (std::size_t i = 0; i < w.size(); ++i) identity = std::max(identity, std::abs(o.samples[i] - w.samples[i]));
  }
  Report("drc", worst_gain <= 0.1 && reduction >= 0.30 && identity <= 1e-6,
         Fmt("sine gain worst dev %.3f dB, envelope std reduction %.0f%%, identity max diff %.2g", worst_gain,
             100.0 * reduction, identity));
}

std::vector<Waveform> TwoVoiceReference() {
  std::vector<Waveform> ref = DeskCorpus(1);
  ref.insert(ref.end(), DeskCorpus(2).begin(), DeskCorpus(2).end());
  return ref;
}

Waveform Ssn(const std::vector<Waveform>& reference) {
  noise::SsnConfig c;
  c.duration_s = 30.0;
  return noise::MakeSpeechShapedNoise(reference, c);
}

void Mixing() {
  const Waveform ssn = Ssn(TwoVoiceReference());
  std::vector<double> cs;
  for (int i = 10; i < 14; ++i) cs.insert(cs.end(), DeskCorpus(2)[i].samples.begin(), DeskCorpus(2)[i].samples.end());
  const Waveform competing(cs, 16000);
  const Waveform& target = DeskCorpus()[0];
  double worst = 0.0, worst_dur = 0.0;
  for (double snr : {1.0, -4.0, -9.0, -7.0, -14.0, -21.0}) {
    for (const Waveform* masker : {&ssn, &competing}) {
      noise::MixRecipe r;
      r.snr_db = snr;
      const noise::MixResult m = noise::MixAtSnr(target, *masker, r);
      // Oracle: active level over the target span against plain masker RMS.
      const std::vector<double> span(m.target_component.samples.begin() + m.target_offset,
                                     m.target_component.samples.begin() + m.target_offset + m.target_length);
      const double measured = noise::ActiveSpeechLevel(Waveform(span, 16000)) -
                              Db(PlainRms(m.masker_component.samples));
      worst = std::max(worst, std::abs(measured - snr));
      worst_dur = std::max(worst_dur, std::abs(m.mixture.size() - target.size() - 16000.0));
    }
  }
  Report("mixing", worst <= 0.1 && worst_dur == 0.0,
         Fmt("6 SNRs x SSN/CS, worst SNR dev %.4f dB, duration excess off by %.0f samples", worst, worst_dur));
}

void SsnFidelity() {
  const auto ref = TwoVoiceReference();
  const Waveform ssn = Ssn(ref);
  const LtasCurve lr = Ltas(ref);
  const std::vector<Waveform> nv{ssn};
  const LtasCurve ln = Ltas(nv);
  const double offset = MeanLevelDb(lr, 100, 7000) - MeanLevelDb(ln, 100, 7000);
  double worst = 0.0;
  for (std::size_t i = 0; i < lr.band_hz.size(); ++i) {
    if (lr.band_hz[i] < 100 || lr.band_hz[i] > 7000) continue;
    worst = std::max(worst, std::abs(ln.level_db[i] + offset - lr.level_db[i]));
  }
  double lo = 1e9, hi = -1e9;
  for (std::size_t s = 0; s + 8000 <= ssn.size(); s += 8000) {
    const double r = Db(PlainRms(Slice(ssn, s, 8000)));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  Report("ssn-fidelity", worst <= 3.0 && hi - lo < 1.5,
         Fmt("worst band dev %.2f dB over 100-7000 Hz, 0.5 s RMS spread %.2f dB", worst, hi - lo));
}

std::size_t TableLcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
    }
  }
  return t[a.size()][b.size()];
}

void WrrOracle() {
  static const char* vocab[] = {"the", "a", "birch", "canoe", "slid", "on", "smooth", "planks", "glue", "sheet"};
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> word(0, 9), len(0, 14);
  int mismatches = 0;
  for (int k = 0; k < 1000; ++k) {
    std::vector<std::string> a(len(rng)), b(len(rng));
    for (auto& w : a) w = vocab[word(rng)];
    for (auto& w : b) w = vocab[word(rng)];
    mismatches += eval::LcsLength(a, b) != TableLcs(a, b);
  }
  const double worked =
      eval::WordRecognitionRate("the birch canoe slid on the smooth planks", "the canoe slid on planks");
  Report("wrr-oracle", mismatches == 0 && worked == 0.6,
         Fmt("%d/1000 LCS mismatches, worked example %.3f", mismatches, worked));
}

void QualificationBoundaries() {
  using S = eval::Qualification::Status;
  const bool ok = eval::QualifyMeans(0.80, 10, 0.5, 20).status == S::kQualified &&
                  eval::QualifyMeans(0.80 - 1e-9, 10, 0.5, 20).status == S::kNotQualified &&
                  eval::QualifyMeans(0.9, 10, 0.10, 20).status == S::kNotQualified &&
                  eval::QualifyMeans(0.9, 10, 0.10 + 1e-9, 20).status == S::kQualified &&
                  eval::QualifyMeans(0.9, 0, 0.5, 20).status == S::kIndeterminate;
  Report("qualification", ok, "ref 0.80 inclusive, test 0.10 exclusive");
}

// Drops words at a rate set by the trial's SNR, from an RNG keyed on the
// trial id, so the transcript depends only on the manifest.
std::string ScriptedTranscript(const eval::Trial& t) {
  std::mt19937_64 rng(std::hash<std::string>{}(t.trial_id));
  const double keep = t.is_reference ? 0.95 : std::clamp(0.6 + 0.04 * t.snr_db, 0.2, 0.95);
  std::bernoulli_distribution coin(keep);
  std::string out;
  for (const auto& w : eval::NormalizeTranscript(t.reference_text)) {
    if (coin(rng)) out += (out.empty() ? "" : " ") + w;
  }
  return out;
}

struct PipelineOutput {
  std::string manifest;
  std::vector<std::vector<unsigned char>> wavs;
  std::string results;
};

PipelineOutput RunPipeline(const fs::path& dir, std::uint64_t seed) {
  PlanShape shape;
  shape.reference_utterances = 2;
  shape.seed = seed;
  const fs::path plan = WriteDeskPlan(dir / "plan", shape);
  const stimuli::Manifest manifest = stimuli::GenerateStimuli(stimuli::LoadPlan(plan), dir / "out", {.jobs = 3});
  PipelineOutput out;
  out.manifest = ReadTextFile(dir / "out" / "manifest.json");
  for (const auto& t : manifest.trials) out.wavs.push_back(ReadBinaryFile(dir / "out" / t.trial.path));

  service::ServiceConfig config;
  config.seed = seed;
  config.reference_trials = 2;
  service::ListeningTest test(manifest, dir / "out", dir / "log.jsonl", config);
  for (const char* listener : {"L1", "L2"}) {
    const auto session = test.CreateSession(listener, eval::AudioDevice::kHeadphones);
    for (;;) {
      const auto next = test.Next(session.session_id);
      if (next.done) break;
      test.ConsumeAudio(next.trial_id, next.audio_token);
      const auto it = std::find_if(manifest.trials.begin(), manifest.trials.end(),
                                   [&](const auto& t) { return t.trial.trial_id == next.trial_id; });
      test.Submit(session.session_id, next.trial_id, ScriptedTranscript(it->trial));
    }
  }
  out.results = test.Results().csv;
  return out;
}

void EndToEnd() {
  TempDir a("acc_a"), b("acc_b"), c("acc_c");
  const PipelineOutput first = RunPipeline(a.path(), 17);
  const PipelineOutput again = RunPipeline(b.path(), 17);
  const PipelineOutput other = RunPipeline(c.path(), 18);
  const bool same = first.manifest == again.manifest && first.wavs == again.wavs && first.results == again.results;
  const bool seeded = first.manifest != other.manifest;
  const auto rows = std::count(first.results.begin(), first.results.end(), '\n');
  Report("end-to-end-determinism", same && seeded && rows > 1 && !first.wavs.empty(),
         Fmt("%zu stimuli, %ld result rows, identical rerun %s, seed-sensitive %s", first.wavs.size(), rows,
             same ? "yes" : "no", seeded ? "yes" : "no"));
}

}  // namespace

int main() {
  Criterion("tilt-ar1", TiltAccuracy);
  Criterion("normalization-anchors", NormalizationAnchors);
  Criterion("effort-response", EffortSweep);
  Criterion("ss-fixed-stage", FixedStage);
  Criterion("ltas-shape", LtasShape);
  Criterion("drc", DrcBehaviour);
  Criterion("mixing", Mixing);
  Criterion("ssn-fidelity", SsnFidelity);
  Criterion("wrr-oracle", WrrOracle);
  Criterion("qualification", QualificationBoundaries);
  Criterion("end-to-end-determinism", EndToEnd);
  std::printf("%s: %d failing\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}

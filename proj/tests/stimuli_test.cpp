#include <gtest/gtest.h>

#include <set>

#include "effortlab/error.hpp"
#include "effortlab/level.hpp"
#include "effortlab/mix.hpp"
#include "plan_fixture.hpp"

using namespace effortlab;
using namespace effortlab::stimuli;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

std::size_t WavCount(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().extension() == ".wav";
  return n;
}

}  // namespace

TEST(Stimuli, CrossProductFileCount) {
  TempDir dir("stim");
  const Plan plan = LoadPlan(WriteDeskPlan(dir.path(), {}));
  const Manifest m = GenerateStimuli(plan, dir / "out", {2});
  EXPECT_EQ(m.trials.size(), 12u);
  EXPECT_TRUE(m.errors.empty());
  EXPECT_EQ(WavCount(dir / "out"), 12u);
  std::set<std::string> ids, names;
  for (const auto& t : m.trials) {
    ids.insert(t.trial.trial_id);
    names.insert(t.trial.path);
    EXPECT_TRUE(fs::exists(dir / "out" / t.trial.path));
  }
  EXPECT_EQ(ids.size(), 12u);
  EXPECT_TRUE(names.count("h01_ssdrc_ssn_-9.wav"));
  EXPECT_TRUE(names.count("h03_none_ssn_1.wav"));
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
}

TEST(Stimuli, RerunIsByteIdenticalAcrossJobCounts) {
  TempDir dir("stim");
  const Plan plan = LoadPlan(WriteDeskPlan(dir.path(), {}));
  const Manifest a = GenerateStimuli(plan, dir / "a", {1});
  const Manifest b = GenerateStimuli(plan, dir / "b", {4});
  EXPECT_EQ(FormatManifest(a), FormatManifest(b));
  for (const auto& t : a.trials) {
    EXPECT_EQ(ReadBinaryFile(dir / "a" / t.trial.path), ReadBinaryFile(dir / "b" / t.trial.path)) << t.trial.path;
  }
  Plan other = plan;
  other.seed = 8;
  const Manifest c = GenerateStimuli(other, dir / "c", {4});
  EXPECT_NE(a.trials[0].trial.trial_id, c.trials[0].trial.trial_id);
}

TEST(Stimuli, MixturesHitTheirSnr) {
  TempDir dir("stim");
  PlanShape shape;
  shape.test_utterances = 1;
  shape.systems = {"none"};
  const Plan plan = LoadPlan(WriteDeskPlan(dir.path(), shape));
  const Manifest m = GenerateStimuli(plan, dir / "out");
  ASSERT_EQ(m.trials.size(), 2u);
  for (const auto& t : m.trials) {
    const Waveform w = wav::Read(dir / "out" / t.trial.path);
    EXPECT_NEAR(w.duration_seconds(), DeskCorpus()[0].duration_seconds() + 1.0, 1e-9);
  }
}

TEST(Stimuli, MissingSourceBecomesErrorRows) {
  TempDir dir("stim");
  const fs::path plan_path = WriteDeskPlan(dir.path(), {});
  fs::remove(dir / "speech" / "h02.wav");
  const Manifest m = GenerateStimuli(LoadPlan(plan_path), dir / "out");
  EXPECT_EQ(m.trials.size(), 8u);
  ASSERT_EQ(m.errors.size(), 4u);
  for (const auto& e : m.errors) {
    EXPECT_EQ(e.utterance_id, "h02");
    EXPECT_FALSE(e.message.empty());
  }
  EXPECT_EQ(WavCount(dir / "out"), 8u);
  const Manifest back = LoadManifest(dir / "out" / "manifest.json");
  EXPECT_EQ(back.errors.size(), 4u);
}

TEST(Stimuli, FailingSystemOnlyAffectsItsTrials) {
  TempDir dir("stim");
  PlanShape shape;
  shape.snrs = {-4.0};
  shape.systems = {"ssdrc"};
  Plan plan = LoadPlan(WriteDeskPlan(dir.path(), shape));
  SystemSpec broken;
  broken.label = "loud";
  broken.method = Method::kEffort;
  broken.bias = 1.0;
  broken.stats = dir / "missing.stats";
  plan.systems.push_back(broken);
  const Manifest m = GenerateStimuli(plan, dir / "out");
  EXPECT_EQ(m.trials.size(), 3u);
  ASSERT_EQ(m.errors.size(), 3u);
  for (const auto& e : m.errors) EXPECT_EQ(e.system, "loud");
  for (const auto& t : m.trials) EXPECT_EQ(t.trial.system, "ssdrc");
}

TEST(Stimuli, ReferenceTrialsAreClean) {
  TempDir dir("stim");
  PlanShape shape;
  shape.reference_utterances = 2;
  const Manifest m = GenerateStimuli(LoadPlan(WriteDeskPlan(dir.path(), shape)), dir / "out");
  ASSERT_EQ(m.trials.size(), 14u);
  std::size_t refs = 0;
  for (const auto& t : m.trials) {
    if (!t.trial.is_reference) continue;
    ++refs;
    EXPECT_EQ(t.trial.masker, "none");
    EXPECT_EQ(t.trial.system, "none");
    const Waveform w = wav::Read(dir / "out" / t.trial.path);
    EXPECT_NEAR(noise::ActiveSpeechLevel(w), -26.0, 0.05);
  }
  EXPECT_EQ(refs, 2u);
}

TEST(Plan, SchemaErrorsAreFormatErrors) {
  auto code = [](const std::string& text) {
    try {
      ParsePlan(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  EXPECT_EQ(code("{"), ErrorCode::kFormat);
  EXPECT_EQ(code("[]"), ErrorCode::kFormat);
  EXPECT_EQ(code(R"({"utterances":[],"systems":[],"maskers":[]})"), ErrorCode::kFormat);
  EXPECT_EQ(code(R"({"utterances":[{"id":"a","text":"x","audio":"a.wav"}],
                     "systems":[{"method":"loud"}],
                     "maskers":[{"kind":"ssn","sources":["m.wav"],"snrs":[0]}]})"),
            ErrorCode::kFormat);
}

TEST(Plan, PathsResolveAgainstPlanDirectory) {
  const Plan p = ParsePlan(R"({"utterances":[{"id":"a","text":"x","audio":"s/a.wav"}],
                               "systems":[{"method":"ss"}],
                               "maskers":[{"kind":"cs","sources":["/abs/m.wav"],"snrs":[-7]}]})",
                           "/base");
  EXPECT_EQ(p.utterances[0].audio, fs::path("/base/s/a.wav"));
  EXPECT_EQ(p.maskers[0].sources[0], fs::path("/abs/m.wav"));
  EXPECT_EQ(p.maskers[0].label, "cs");
  EXPECT_EQ(p.systems[0].label, "ss");
}

TEST(Manifest, RoundTripAndMalformed) {
  TempDir dir("stim");
  PlanShape shape;
  shape.test_utterances = 1;
  const Manifest m = GenerateStimuli(LoadPlan(WriteDeskPlan(dir.path(), shape)), dir / "out");
  EXPECT_EQ(FormatManifest(ParseManifest(FormatManifest(m))), FormatManifest(m));
  try {
    ParseManifest(R"({"version":1,"seed":0,"sample_rate":16000,"trials":[{"trial_id":5}],"errors":[]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
  }
}

TEST(Naming, TrialFileNames) {
  EXPECT_EQ(TrialFileName("h01", "ssdrc", "cs", -14.0), "h01_ssdrc_cs_-14.wav");
  EXPECT_EQ(TrialFileName("h01", "none", "none", std::nullopt), "h01_none_none_clean.wav");
  EXPECT_EQ(FormatSnr(-4.5), "-4.5");
  EXPECT_EQ(MakeTrialId(1, "a", "b", "c", "d"), MakeTrialId(1, "a", "b", "c", "d"));
  EXPECT_NE(MakeTrialId(1, "a", "b", "c", "d"), MakeTrialId(2, "a", "b", "c", "d"));
  EXPECT_EQ(MakeTrialId(1, "a", "b", "c", "d").size(), 17u);
}

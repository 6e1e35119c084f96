#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <thread>

#include "effortlab/error.hpp"
#include "effortlab/file_util.hpp"
#include "effortlab/service.hpp"
#include "service_fixture.hpp"

using namespace effortlab;
using namespace effortlab::service;
using namespace testing_support;
using eval::AudioDevice;

namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::kInvalidArgument;
}

class ServiceTest : public ::testing::Test {
 protected:
  TempDir dir{"svc"};
  stimuli::Manifest manifest = SyntheticManifest(dir / "audio", 30, 25);
  std::map<std::string, eval::Trial> by_id = [this] {
    std::map<std::string, eval::Trial> out;
    for (const auto& t : manifest.trials) out[t.trial.trial_id] = t.trial;
    return out;
  }();

  std::unique_ptr<ListeningTest> Open(ServiceConfig config = {}) {
    return std::make_unique<ListeningTest>(manifest, dir / "audio", dir / "log.jsonl", config);
  }

  // Answers every remaining trial; references perfectly when `good`, test
  // trials with the first two words.
  void RunListener(ListeningTest& t, const std::string& session, bool good) {
    for (;;) {
      const NextTrial n = t.Next(session);
      if (n.done) return;
      const eval::Trial& trial = by_id.at(n.trial_id);
      std::string answer;
      if (trial.is_reference) {
        answer = good ? trial.reference_text : "";
      } else {
        answer = trial.reference_text.substr(0, trial.reference_text.find(' ', trial.reference_text.find(' ') + 1));
      }
      t.Submit(session, n.trial_id, answer);
    }
  }
};

}  // namespace

TEST_F(ServiceTest, PlaylistShape) {
  ServiceConfig c;
  c.max_test_trials = 30;
  auto t = Open(c);
  const SessionInfo s = t->CreateSession("alice", AudioDevice::kHeadphones);
  EXPECT_EQ(s.total, 40u);
  const auto playlist = t->Playlist(s.session_id);
  std::set<std::string> utterances;
  std::size_t refs = 0;
  for (const auto& id : playlist) {
    refs += by_id.at(id).is_reference;
    EXPECT_TRUE(utterances.insert(by_id.at(id).utterance_id).second) << "utterance repeated";
  }
  EXPECT_EQ(refs, 10u);
  // Reference positions are shuffled, not bunched at the start.
  std::size_t refs_in_first_ten = 0;
  for (std::size_t i = 0; i < 10; ++i) refs_in_first_ten += by_id.at(playlist[i]).is_reference;
  EXPECT_LT(refs_in_first_ten, 10u);
}

TEST_F(ServiceTest, NoUtteranceTwiceAcrossSessions) {
  ServiceConfig c;
  c.max_test_trials = 10;
  auto t = Open(c);
  const SessionInfo a = t->CreateSession("bob", AudioDevice::kEarbuds);
  const SessionInfo b = t->CreateSession("bob", AudioDevice::kEarbuds);
  std::set<std::string> seen;
  for (const auto& id : t->Playlist(a.session_id)) seen.insert(by_id.at(id).utterance_id);
  for (const auto& id : t->Playlist(b.session_id)) {
    EXPECT_FALSE(seen.count(by_id.at(id).utterance_id)) << id;
  }
  // 25 references: a third session cannot get ten unheard ones.
  EXPECT_EQ(CodeOf([&] { t->CreateSession("bob", AudioDevice::kEarbuds); }), ErrorCode::kExhausted);
}

TEST_F(ServiceTest, ListenersGetDifferentPlaylists) {
  auto t = Open();
  const SessionInfo a = t->CreateSession("a", AudioDevice::kHeadphones);
  const SessionInfo b = t->CreateSession("b", AudioDevice::kHeadphones);
  EXPECT_NE(t->Playlist(a.session_id), t->Playlist(b.session_id));
  EXPECT_NE(a.session_id, b.session_id);
  // Same seed, fresh log: identical playlist for the same listener.
  TempDir other("svc2");
  ListeningTest u(manifest, dir / "audio", other / "log.jsonl", {});
  EXPECT_EQ(t->Playlist(a.session_id), u.Playlist(u.CreateSession("a", AudioDevice::kHeadphones).session_id));
}

TEST_F(ServiceTest, SequencingConflictAndCompletion) {
  ServiceConfig c;
  c.max_test_trials = 2;
  auto t = Open(c);
  const SessionInfo s = t->CreateSession("carol", AudioDevice::kSpeakers);
  ASSERT_EQ(s.total, 12u);
  const auto playlist = t->Playlist(s.session_id);
  NextTrial n = t->Next(s.session_id);
  EXPECT_EQ(n.index, 0u);
  EXPECT_EQ(n.trial_id, playlist[0]);
  EXPECT_EQ(CodeOf([&] { t->Submit(s.session_id, playlist[1], "x"); }), ErrorCode::kSequencing);
  t->Submit(s.session_id, playlist[0], "x");
  EXPECT_EQ(t->Session(s.session_id).cursor, 1u);
  EXPECT_EQ(CodeOf([&] { t->Submit(s.session_id, playlist[0], "x"); }), ErrorCode::kConflict);
  n = t->Next(s.session_id);
  EXPECT_EQ(n.trial_id, playlist[1]);
  for (std::size_t i = 1; i < playlist.size(); ++i) t->Submit(s.session_id, playlist[i], "");
  EXPECT_TRUE(t->Next(s.session_id).done);
  EXPECT_EQ(CodeOf([&] { t->Submit(s.session_id, "t0", "x"); }), ErrorCode::kSessionDone);
  EXPECT_EQ(CodeOf([&] { t->Next("nope"); }), ErrorCode::kNotFound);
}

TEST_F(ServiceTest, AudioServedOnce) {
  auto t = Open();
  const SessionInfo s = t->CreateSession("dave", AudioDevice::kHeadphones);
  const NextTrial n = t->Next(s.session_id);
  ASSERT_FALSE(n.audio_token.empty());
  EXPECT_EQ(CodeOf([&] { t->ConsumeAudio(n.trial_id, "bogus"); }), ErrorCode::kNotFound);
  const auto bytes = t->ConsumeAudio(n.trial_id, n.audio_token);
  EXPECT_EQ(bytes, ReadBinaryFile(dir / "audio" / by_id.at(n.trial_id).path));
  EXPECT_EQ(CodeOf([&] { t->ConsumeAudio(n.trial_id, n.audio_token); }), ErrorCode::kGone);
  const NextTrial again = t->Next(s.session_id);
  EXPECT_TRUE(again.played);
  EXPECT_TRUE(again.audio_token.empty());
}

TEST_F(ServiceTest, ResultsExcludeFailingListener) {
  ServiceConfig c;
  c.max_test_trials = 6;
  auto t = Open(c);
  EXPECT_TRUE(t->Results().outcome.reports.empty());
  const SessionInfo good = t->CreateSession("good", AudioDevice::kHeadphones);
  const SessionInfo bad = t->CreateSession("bad", AudioDevice::kEarbuds);
  RunListener(*t, good.session_id, true);
  RunListener(*t, bad.session_id, false);
  const ResultsView r = t->Results();
  ASSERT_EQ(r.outcome.listeners.size(), 2u);
  for (const auto& l : r.outcome.listeners) {
    EXPECT_EQ(l.qualification.status, l.listener_id == "good" ? eval::Qualification::Status::kQualified
                                                              : eval::Qualification::Status::kNotQualified);
  }
  std::size_t n = 0;
  for (const auto& rep : r.outcome.reports) n += rep.n;
  EXPECT_EQ(n, 6u);
  ASSERT_EQ(r.outcome.device_reports.size(), 1u);
  EXPECT_EQ(r.outcome.device_reports[0].keys[0].second, "headphones");
}

TEST_F(ServiceTest, LogMatchesOfflineScoring) {
  ServiceConfig c;
  c.max_test_trials = 8;
  c.seed = 99;
  auto t = Open(c);
  RunListener(*t, t->CreateSession("p1", AudioDevice::kHeadphones).session_id, true);
  RunListener(*t, t->CreateSession("p2", AudioDevice::kSpeakers).session_id, true);
  const std::string online = t->Results().csv;
  const auto responses = eval::ParseResponsesJsonl(ReadTextFile(dir / "log.jsonl"));
  const auto trials = manifest.Trials();
  const auto offline = eval::ScoreResponses(trials, responses, eval::Grouping{}, {1000, 99});
  EXPECT_EQ(eval::FormatReportCsv(offline.reports, eval::Grouping{}), online);
}

TEST_F(ServiceTest, ReplayRestoresState) {
  ServiceConfig c;
  c.max_test_trials = 5;
  std::string session, csv;
  std::vector<std::string> playlist;
  {
    auto t = Open(c);
    session = t->CreateSession("erin", AudioDevice::kHeadphones).session_id;
    RunListener(*t, t->CreateSession("finn", AudioDevice::kEarbuds).session_id, true);
    playlist = t->Playlist(session);
    for (int i = 0; i < 3; ++i) t->Submit(session, t->Next(session).trial_id, "birch");
    const NextTrial n = t->Next(session);
    t->ConsumeAudio(n.trial_id, n.audio_token);
    csv = t->Results().csv;
  }
  auto t = Open(c);
  EXPECT_EQ(t->Playlist(session), playlist);
  EXPECT_EQ(t->Session(session).cursor, 3u);
  const NextTrial n = t->Next(session);
  EXPECT_EQ(n.trial_id, playlist[3]);
  EXPECT_TRUE(n.played);
  EXPECT_TRUE(n.audio_token.empty());
  EXPECT_EQ(t->Results().csv, csv);
  EXPECT_EQ(CodeOf([&] { t->Submit(session, playlist[2], "again"); }), ErrorCode::kConflict);
  // A new session for an existing listener still avoids heard utterances.
  const auto next = t->Playlist(t->CreateSession("erin", AudioDevice::kHeadphones).session_id);
  for (const auto& id : next) {
    for (const auto& old : playlist) EXPECT_NE(by_id.at(id).utterance_id, by_id.at(old).utterance_id);
  }
}

TEST_F(ServiceTest, TornLastLineTolerated) {
  std::string session;
  {
    auto t = Open();
    session = t->CreateSession("gus", AudioDevice::kHeadphones).session_id;
    t->Submit(session, t->Next(session).trial_id, "x");
  }
  {
    std::ofstream log(dir / "log.jsonl", std::ios::app);
    log << "{\"type\":\"response\",\"trial";
  }
  auto t = Open();
  EXPECT_EQ(t->Session(session).cursor, 1u);
  // Appending after the torn line still yields a parseable log.
  t->Submit(session, t->Next(session).trial_id, "y");
  auto u = Open();
  EXPECT_EQ(u->Session(session).cursor, 2u);
}

TEST_F(ServiceTest, ConcurrentSessions) {
  ServiceConfig c;
  c.max_test_trials = 4;
  auto t = Open(c);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] {
      const std::string s = t->CreateSession("w" + std::to_string(i), AudioDevice::kHeadphones).session_id;
      for (;;) {
        const NextTrial n = t->Next(s);
        if (n.done) break;
        if (!n.audio_token.empty()) t->ConsumeAudio(n.trial_id, n.audio_token);
        t->Submit(s, n.trial_id, "birch canoe");
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(t->Responses().size(), 8u * 14u);
  auto u = Open(c);
  EXPECT_EQ(u->Responses().size(), 8u * 14u);
  EXPECT_EQ(u->Results().csv, t->Results().csv);
}

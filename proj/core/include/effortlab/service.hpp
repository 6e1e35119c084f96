#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "effortlab/scoring.hpp"
#include "effortlab/stimuli.hpp"

namespace effortlab::service {

struct ServiceConfig {
  std::uint64_t seed = 0;
  std::size_t max_test_trials = 720;
  std::size_t reference_trials = 10;
  eval::Grouping grouping;
  int bootstrap_resamples = 1000;
};

struct SessionInfo {
  std::string session_id;
  std::string listener_id;
  eval::AudioDevice device = eval::AudioDevice::kHeadphones;
  std::size_t total = 0;
  std::size_t cursor = 0;
  bool done() const { return cursor >= total; }
};

struct NextTrial {
  bool done = false;
  std::string trial_id;
  std::size_t index = 0;  // zero-based position in the playlist
  std::size_t total = 0;
  // One-shot audio token; empty once the audio for this trial was served.
  std::string audio_token;
  bool played = false;
};

struct ResultsView {
  eval::ScoringOutcome outcome;
  std::string csv;
};

// Listening-test state machine over a stimulus manifest. Every state change
// is appended to a JSONL log and fsync'ed before the call returns; on
// construction the log is replayed, so a restarted service continues where
// it stopped. Thread-safe.
class ListeningTest {
 public:
  ListeningTest(stimuli::Manifest manifest, std::filesystem::path audio_dir,
                std::filesystem::path log_path, ServiceConfig config = {});
  ~ListeningTest();
  ListeningTest(const ListeningTest&) = delete;
  ListeningTest& operator=(const ListeningTest&) = delete;

  // Throws kExhausted when the listener has too few unheard utterances left
  // for the reference trials plus at least one test trial.
  SessionInfo CreateSession(const std::string& listener_id, eval::AudioDevice device);
  SessionInfo Session(const std::string& session_id) const;
  // Issues a fresh token while the current trial's audio is unplayed.
  NextTrial Next(const std::string& session_id);
  // Returns the WAV bytes once per token: kNotFound for an unknown token or
  // a token of another trial, kGone for a consumed one.
  std::vector<unsigned char> ConsumeAudio(const std::string& trial_id, const std::string& token);
  // kSequencing when trial_id is not the current trial, kConflict when it
  // was already answered, kSessionDone after the last trial.
  void Submit(const std::string& session_id, const std::string& trial_id, const std::string& transcript);

  ResultsView Results(const std::optional<eval::Grouping>& grouping = std::nullopt) const;
  std::vector<eval::TrialResponse> Responses() const;
  // Playlist of a session, for tests and audits.
  std::vector<std::string> Playlist(const std::string& session_id) const;
  const stimuli::Manifest& manifest() const { return manifest_; }

 private:
  struct SessionState {
    SessionInfo info;
    std::vector<std::string> playlist;
    std::set<std::string> played;
  };
  struct Token {
    std::string trial_id;
    std::string session_id;
    bool consumed = false;
  };

  void Replay();
  void Append(const std::string& line);
  SessionState& Find(const std::string& session_id);
  const SessionState& Find(const std::string& session_id) const;
  std::vector<std::string> BuildPlaylist(const std::string& listener_id, std::uint64_t ordinal) const;
  void ApplySession(const std::string& session_id, const std::string& listener_id, eval::AudioDevice device,
                    std::vector<std::string> playlist);
  void ApplyResponse(SessionState& s, const eval::TrialResponse& r);

  stimuli::Manifest manifest_;
  std::filesystem::path audio_dir_;
  std::filesystem::path log_path_;
  ServiceConfig config_;
  std::map<std::string, const eval::Trial*> trials_;

  mutable std::mutex mutex_;
  int log_fd_ = -1;
  std::map<std::string, SessionState> sessions_;
  std::map<std::string, std::uint64_t> sessions_per_listener_;
  std::map<std::string, std::set<std::string>> heard_;  // listener -> utterance ids
  std::set<std::pair<std::string, std::string>> answered_;  // (listener, trial)
  std::vector<eval::TrialResponse> responses_;
  std::map<std::string, Token> tokens_;
  std::mt19937_64 token_rng_;
};

std::string IsoTimestampNow();

}  // namespace effortlab::service

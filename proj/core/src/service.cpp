#include "effortlab/service.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>

#include <nlohmann/json.hpp>

#include "effortlab/error.hpp"
#include "effortlab/file_util.hpp"

namespace effortlab::service {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string Hex64(char prefix, std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%c%016" PRIx64, prefix, v);
  return buf;
}

template <typename T>
void Shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  // Explicit Fisher-Yates: std::shuffle's draw sequence is library-specific.
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng() % i]);
}

}  // namespace

std::string IsoTimestampNow() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

ListeningTest::ListeningTest(stimuli::Manifest manifest, fs::path audio_dir, fs::path log_path,
                             ServiceConfig config)
    : manifest_(std::move(manifest)),
      audio_dir_(std::move(audio_dir)),
      log_path_(std::move(log_path)),
      config_(config),
      token_rng_(std::random_device{}()) {
  if (config_.reference_trials == 0 || config_.max_test_trials == 0) {
    throw Error(ErrorCode::kConfig, "sessions need at least one reference and one test trial");
  }
  for (const auto& mt : manifest_.trials) trials_[mt.trial.trial_id] = &mt.trial;
  if (log_path_.has_parent_path()) fs::create_directories(log_path_.parent_path());
  Replay();
  log_fd_ = ::open(log_path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (log_fd_ < 0) {
    throw Error(ErrorCode::kIo, "cannot open log " + log_path_.string() + ": " + std::strerror(errno));
  }
}

ListeningTest::~ListeningTest() {
  if (log_fd_ >= 0) ::close(log_fd_);
}

void ListeningTest::Append(const std::string& line) {
  const std::string data = line + "\n";
  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t n = ::write(log_fd_, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIo, "log append failed: " + std::string(std::strerror(errno)));
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(log_fd_) != 0) throw Error(ErrorCode::kIo, "log fsync failed: " + std::string(std::strerror(errno)));
}

void ListeningTest::Replay() {
  if (!fs::exists(log_path_)) return;
  const std::string text = ReadTextFile(log_path_);
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    const bool last = end == std::string::npos;
    if (last) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      // A crash mid-append leaves at most one torn line at the end; cut it
      // so the next record starts on a fresh line.
      if (last) {
        fs::resize_file(log_path_, text.size() - line.size());
        break;
      }
      throw Error(ErrorCode::kFormat, "log line " + std::to_string(line_no) + " is not valid JSON");
    }
    if (last) {
      // Complete record whose newline never made it to disk.
      std::ofstream(log_path_, std::ios::app) << '\n';
    }
    try {
      const std::string type = j.at("type").get<std::string>();
      if (type == "session") {
        ApplySession(j.at("session_id").get<std::string>(), j.at("listener_id").get<std::string>(),
                     eval::ParseAudioDevice(j.at("device").get<std::string>()),
                     j.at("playlist").get<std::vector<std::string>>());
      } else if (type == "played") {
        Find(j.at("session_id").get<std::string>()).played.insert(j.at("trial_id").get<std::string>());
      } else if (type == "response") {
        eval::TrialResponse r;
        r.trial_id = j.at("trial_id").get<std::string>();
        r.listener_id = j.at("listener_id").get<std::string>();
        r.transcript = j.at("transcript").get<std::string>();
        r.device = eval::ParseAudioDevice(j.at("device").get<std::string>());
        r.timestamp = j.value("timestamp", std::string());
        ApplyResponse(Find(j.at("session_id").get<std::string>()), r);
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, "log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

ListeningTest::SessionState& ListeningTest::Find(const std::string& session_id) {
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "unknown session '" + session_id + "'");
  return it->second;
}

const ListeningTest::SessionState& ListeningTest::Find(const std::string& session_id) const {
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "unknown session '" + session_id + "'");
  return it->second;
}

void ListeningTest::ApplySession(const std::string& session_id, const std::string& listener_id,
                                 eval::AudioDevice device, std::vector<std::string> playlist) {
  SessionState s;
  s.info.session_id = session_id;
  s.info.listener_id = listener_id;
  s.info.device = device;
  s.info.total = playlist.size();
  for (const auto& id : playlist) {
    const auto it = trials_.find(id);
    if (it == trials_.end()) throw Error(ErrorCode::kFormat, "session refers to unknown trial '" + id + "'");
    heard_[listener_id].insert(it->second->utterance_id);
  }
  s.playlist = std::move(playlist);
  sessions_[session_id] = std::move(s);
  ++sessions_per_listener_[listener_id];
}

void ListeningTest::ApplyResponse(SessionState& s, const eval::TrialResponse& r) {
  s.played.insert(r.trial_id);
  answered_.emplace(r.listener_id, r.trial_id);
  responses_.push_back(r);
  ++s.info.cursor;
}

std::vector<std::string> ListeningTest::BuildPlaylist(const std::string& listener_id,
                                                      std::uint64_t ordinal) const {
  std::mt19937_64 rng(Fnv1a64(listener_id + "#" + std::to_string(ordinal),
                              Fnv1a64(std::to_string(config_.seed))));
  const auto heard_it = heard_.find(listener_id);
  const std::set<std::string> empty;
  const std::set<std::string>& heard = heard_it == heard_.end() ? empty : heard_it->second;

  std::vector<const eval::Trial*> refs;
  std::map<std::string, std::vector<const eval::Trial*>> tests;
  for (const auto& mt : manifest_.trials) {
    const eval::Trial& t = mt.trial;
    if (heard.count(t.utterance_id)) continue;
    if (t.is_reference) {
      refs.push_back(&t);
    } else {
      tests[t.utterance_id].push_back(&t);
    }
  }

  Shuffle(refs, rng);
  std::vector<std::string> chosen_refs;
  std::set<std::string> used;
  for (const eval::Trial* t : refs) {
    if (chosen_refs.size() == config_.reference_trials) break;
    if (used.insert(t->utterance_id).second) chosen_refs.push_back(t->trial_id);
  }
  if (chosen_refs.size() < config_.reference_trials) {
    throw Error(ErrorCode::kExhausted, "listener '" + listener_id + "' has fewer than " +
                                           std::to_string(config_.reference_trials) +
                                           " unheard reference utterances");
  }

  std::vector<std::string> utterances;
  for (const auto& [utt, trials] : tests) {
    if (!used.count(utt)) utterances.push_back(utt);
  }
  Shuffle(utterances, rng);
  if (utterances.size() > config_.max_test_trials) utterances.resize(config_.max_test_trials);
  if (utterances.empty()) {
    throw Error(ErrorCode::kExhausted, "no unheard test utterances left for listener '" + listener_id + "'");
  }
  std::vector<std::string> chosen_tests;
  for (const auto& utt : utterances) {
    const auto& options = tests.at(utt);
    chosen_tests.push_back(options[rng() % options.size()]->trial_id);
  }

  std::vector<bool> is_ref(chosen_tests.size() + chosen_refs.size(), false);
  std::fill(is_ref.begin(), is_ref.begin() + static_cast<std::ptrdiff_t>(chosen_refs.size()), true);
  for (std::size_t i = is_ref.size(); i > 1; --i) {
    const std::size_t j = rng() % i;
    const bool tmp = is_ref[i - 1];
    is_ref[i - 1] = is_ref[j];
    is_ref[j] = tmp;
  }
  std::vector<std::string> playlist;
  std::size_t r = 0, t = 0;
  for (bool ref : is_ref) playlist.push_back(ref ? chosen_refs[r++] : chosen_tests[t++]);
  return playlist;
}

SessionInfo ListeningTest::CreateSession(const std::string& listener_id, eval::AudioDevice device) {
  if (listener_id.empty()) throw Error(ErrorCode::kInvalidArgument, "listener_id must not be empty");
  std::lock_guard lock(mutex_);
  const std::uint64_t ordinal = sessions_per_listener_[listener_id];
  std::vector<std::string> playlist = BuildPlaylist(listener_id, ordinal);
  const std::string session_id = Hex64('s', Fnv1a64(listener_id + "#" + std::to_string(ordinal),
                                                    Fnv1a64("session" + std::to_string(config_.seed))));
  ordered_json j;
  j["type"] = "session";
  j["session_id"] = session_id;
  j["listener_id"] = listener_id;
  j["device"] = eval::ToString(device);
  j["ordinal"] = ordinal;
  j["playlist"] = playlist;
  j["timestamp"] = IsoTimestampNow();
  Append(j.dump());
  ApplySession(session_id, listener_id, device, std::move(playlist));
  return sessions_.at(session_id).info;
}

SessionInfo ListeningTest::Session(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  return Find(session_id).info;
}

std::vector<std::string> ListeningTest::Playlist(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  return Find(session_id).playlist;
}

NextTrial ListeningTest::Next(const std::string& session_id) {
  std::lock_guard lock(mutex_);
  SessionState& s = Find(session_id);
  NextTrial next;
  next.total = s.info.total;
  next.index = s.info.cursor;
  if (s.info.done()) {
    next.done = true;
    return next;
  }
  next.trial_id = s.playlist[s.info.cursor];
  if (s.played.count(next.trial_id)) {
    next.played = true;
    return next;
  }
  for (const auto& [token, state] : tokens_) {
    if (state.session_id == session_id && state.trial_id == next.trial_id && !state.consumed) {
      next.audio_token = token;
      return next;
    }
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%016" PRIx64 "%016" PRIx64, token_rng_(), token_rng_());
  next.audio_token = buf;
  tokens_[next.audio_token] = Token{next.trial_id, session_id, false};
  return next;
}

std::vector<unsigned char> ListeningTest::ConsumeAudio(const std::string& trial_id, const std::string& token) {
  std::lock_guard lock(mutex_);
  const auto it = tokens_.find(token);
  if (it == tokens_.end() || it->second.trial_id != trial_id) {
    throw Error(ErrorCode::kNotFound, "no audio token '" + token + "' for trial '" + trial_id + "'");
  }
  if (it->second.consumed) throw Error(ErrorCode::kGone, "audio for trial '" + trial_id + "' was already served");
  const eval::Trial& trial = *trials_.at(trial_id);
  std::vector<unsigned char> bytes = ReadBinaryFile(audio_dir_ / trial.path);
  ordered_json j;
  j["type"] = "played";
  j["session_id"] = it->second.session_id;
  j["trial_id"] = trial_id;
  j["timestamp"] = IsoTimestampNow();
  Append(j.dump());
  it->second.consumed = true;
  Find(it->second.session_id).played.insert(trial_id);
  return bytes;
}

void ListeningTest::Submit(const std::string& session_id, const std::string& trial_id,
                           const std::string& transcript) {
  std::lock_guard lock(mutex_);
  SessionState& s = Find(session_id);
  if (answered_.count({s.info.listener_id, trial_id})) {
    throw Error(ErrorCode::kConflict, "trial '" + trial_id + "' was already answered");
  }
  if (s.info.done()) throw Error(ErrorCode::kSessionDone, "session '" + session_id + "' is complete");
  if (s.playlist[s.info.cursor] != trial_id) {
    throw Error(ErrorCode::kSequencing, "trial '" + trial_id + "' is not the current trial");
  }
  eval::TrialResponse r;
  r.trial_id = trial_id;
  r.listener_id = s.info.listener_id;
  r.transcript = transcript;
  r.device = s.info.device;
  r.timestamp = IsoTimestampNow();
  ordered_json j = ordered_json::parse(eval::FormatResponseJson(r));
  j["session_id"] = session_id;
  Append(j.dump());
  ApplyResponse(s, r);
}

ResultsView ListeningTest::Results(const std::optional<eval::Grouping>& grouping) const {
  std::vector<eval::TrialResponse> responses;
  {
    std::lock_guard lock(mutex_);
    responses = responses_;
  }
  const eval::Grouping g = grouping.value_or(config_.grouping);
  ResultsView view;
  const auto trials = manifest_.Trials();
  view.outcome = eval::ScoreResponses(trials, responses, g, {config_.bootstrap_resamples, config_.seed});
  view.csv = eval::FormatReportCsv(view.outcome.reports, g);
  return view;
}

std::vector<eval::TrialResponse> ListeningTest::Responses() const {
  std::lock_guard lock(mutex_);
  return responses_;
}

}  // namespace effortlab::service

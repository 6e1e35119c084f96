#include "effortlab/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include <nlohmann/json.hpp>

#include "effortlab/error.hpp"
#include "effortlab/file_util.hpp"
#include "effortlab/keyvalue.hpp"
#include "effortlab/transcript.hpp"

namespace effortlab::eval {

namespace {

constexpr double kReferenceThreshold = 0.80;
constexpr double kTestThreshold = 0.10;
// Means of a handful of WRRs land a few ulps off the thresholds.
constexpr double kThresholdSlack = 1e-12;

double Mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

std::string FormatFixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  // Avoid "-0.0000" for tiny negative round-off.
  if (std::string_view(buf) == "-0.0000") return "0.0000";
  return buf;
}

struct GroupKey {
  std::string system, voice, masker;
  double snr = 0.0;
  std::string device;

  auto Tie() const { return std::tie(system, voice, masker, snr, device); }
  bool operator<(const GroupKey& o) const { return Tie() < o.Tie(); }
};

GroupKey MakeKey(const ScoredResponse& r, const Grouping& g) {
  GroupKey k;
  if (g.system) k.system = r.trial.system;
  if (g.voice) k.voice = r.trial.voice;
  if (g.masker) k.masker = r.trial.masker;
  if (g.snr) k.snr = r.trial.snr_db;
  if (g.device) k.device = std::string(ToString(r.response.device));
  return k;
}

std::vector<std::pair<std::string, std::string>> KeyColumns(const GroupKey& k, const Grouping& g) {
  std::vector<std::pair<std::string, std::string>> cols;
  if (g.system) cols.emplace_back("system", k.system);
  if (g.voice) cols.emplace_back("voice", k.voice);
  if (g.masker) cols.emplace_back("masker", k.masker);
  if (g.snr) cols.emplace_back("snr", FormatDouble(k.snr));
  if (g.device) cols.emplace_back("device", k.device);
  return cols;
}

}  // namespace

std::string_view ToString(AudioDevice device) {
  switch (device) {
    case AudioDevice::kEarbuds: return "earbuds";
    case AudioDevice::kHeadphones: return "headphones";
    case AudioDevice::kSpeakers: return "speakers";
  }
  return "headphones";
}

AudioDevice ParseAudioDevice(std::string_view name) {
  if (name == "earbuds") return AudioDevice::kEarbuds;
  if (name == "headphones") return AudioDevice::kHeadphones;
  if (name == "speakers" || name == "loudspeakers") return AudioDevice::kSpeakers;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown audio device '" + std::string(name) + "' (earbuds, headphones, speakers)");
}

std::vector<TrialResponse> ParseResponsesJsonl(std::string_view text) {
  std::vector<TrialResponse> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "responses line " + std::to_string(line_no);
    try {
      const auto j = nlohmann::json::parse(line);
      if (!j.is_object()) throw Error(ErrorCode::kFormat, where + ": expected a JSON object");
      if (j.contains("type") && j.at("type") != "response") continue;
      TrialResponse r;
      r.trial_id = j.at("trial_id").get<std::string>();
      r.listener_id = j.at("listener_id").get<std::string>();
      r.transcript = j.value("transcript", std::string());
      r.device = ParseAudioDevice(j.value("device", std::string("headphones")));
      r.timestamp = j.value("timestamp", std::string());
      if (r.trial_id.empty() || r.listener_id.empty()) {
        throw Error(ErrorCode::kFormat, where + ": empty trial_id or listener_id");
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat, where + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kFormat) throw;
      throw Error(ErrorCode::kFormat, where + ": " + e.what());
    }
  }
  return out;
}

std::string FormatResponseJson(const TrialResponse& r) {
  nlohmann::ordered_json j;
  j["type"] = "response";
  j["trial_id"] = r.trial_id;
  j["listener_id"] = r.listener_id;
  j["transcript"] = r.transcript;
  j["device"] = ToString(r.device);
  j["timestamp"] = r.timestamp;
  return j.dump();
}

std::string_view ToString(Qualification::Status status) {
  switch (status) {
    case Qualification::Status::kQualified: return "qualified";
    case Qualification::Status::kNotQualified: return "not_qualified";
    case Qualification::Status::kIndeterminate: return "indeterminate";
  }
  return "indeterminate";
}

Qualification QualifyMeans(double reference_wrr, std::size_t n_reference, double test_wrr,
                           std::size_t n_test) {
  Qualification q;
  q.reference_wrr = reference_wrr;
  q.test_wrr = test_wrr;
  q.n_reference = n_reference;
  q.n_test = n_test;
  if (n_reference == 0 || n_test == 0) {
    q.status = Qualification::Status::kIndeterminate;
  } else if (reference_wrr >= kReferenceThreshold - kThresholdSlack &&
             test_wrr > kTestThreshold + kThresholdSlack) {
    q.status = Qualification::Status::kQualified;
  } else {
    q.status = Qualification::Status::kNotQualified;
  }
  return q;
}

Qualification Qualify(std::span<const ScoredResponse> listener_responses) {
  std::vector<double> ref, test;
  for (const auto& r : listener_responses) (r.trial.is_reference ? ref : test).push_back(r.wrr);
  return QualifyMeans(Mean(ref), ref.size(), Mean(test), test.size());
}

Grouping ParseGrouping(std::string_view spec) {
  Grouping g{false, false, false, false, false};
  std::size_t pos = 0;
  bool any = false;
  while (pos <= spec.size()) {
    std::size_t end = spec.find(',', pos);
    if (end == std::string_view::npos) end = spec.size();
    const std::string_view key = spec.substr(pos, end - pos);
    pos = end + 1;
    if (key.empty()) continue;
    any = true;
    if (key == "system") g.system = true;
    else if (key == "voice") g.voice = true;
    else if (key == "masker") g.masker = true;
    else if (key == "snr") g.snr = true;
    else if (key == "device") g.device = true;
    else
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown grouping key '" + std::string(key) + "' (system, voice, masker, snr, device)");
  }
  if (!any) throw Error(ErrorCode::kInvalidArgument, "empty grouping");
  return g;
}

double BootstrapHalfWidth(std::span<const double> values, const BootstrapConfig& config) {
  if (config.resamples < 2) throw Error(ErrorCode::kInvalidArgument, "bootstrap needs >= 2 resamples");
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  // Modulo reduction instead of std::uniform_int_distribution keeps the
  // sequence identical across standard library implementations.
  std::mt19937_64 rng(config.seed);
  std::vector<double> means(static_cast<std::size_t>(config.resamples));
  for (double& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += values[rng() % n];
    m = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(means.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, means.size() - 1);
    return means[lo] + (pos - static_cast<double>(lo)) * (means[hi] - means[lo]);
  };
  return std::max(0.0, 0.5 * (quantile(0.975) - quantile(0.025)));
}

std::vector<ScoreReport> Aggregate(std::span<const ScoredResponse> responses, const Grouping& grouping,
                                   const BootstrapConfig& bootstrap) {
  std::map<GroupKey, std::vector<double>> groups;
  for (const auto& r : responses) {
    if (r.trial.is_reference) continue;
    groups[MakeKey(r, grouping)].push_back(r.wrr);
  }
  std::vector<ScoreReport> reports;
  for (const auto& [key, values] : groups) {
    ScoreReport rep;
    rep.keys = KeyColumns(key, grouping);
    rep.n = values.size();
    rep.mean_wrr = Mean(values);
    // Each group draws from its own stream so adding a group elsewhere does
    // not shift this one's interval.
    std::uint64_t seed = Fnv1a64(std::to_string(bootstrap.seed));
    for (const auto& [name, value] : rep.keys) seed = Fnv1a64(name + "=" + value + ";", seed);
    rep.ci95 = BootstrapHalfWidth(values, {bootstrap.resamples, seed});
    reports.push_back(std::move(rep));
  }
  return reports;
}

std::string FormatReportCsv(std::span<const ScoreReport> reports, const Grouping& grouping) {
  std::string out;
  for (const char* name : {"system", "voice", "masker", "snr", "device"}) {
    const std::string_view n(name);
    const bool on = (n == "system" && grouping.system) || (n == "voice" && grouping.voice) ||
                    (n == "masker" && grouping.masker) || (n == "snr" && grouping.snr) ||
                    (n == "device" && grouping.device);
    if (on) {
      out += name;
      out += ',';
    }
  }
  out += "n,mean_wrr,ci95\n";
  for (const auto& r : reports) {
    for (const auto& [name, value] : r.keys) {
      out += value;
      out += ',';
    }
    out += std::to_string(r.n) + "," + FormatFixed(r.mean_wrr) + "," + FormatFixed(r.ci95) + "\n";
  }
  return out;
}

ScoringOutcome ScoreResponses(std::span<const Trial> trials, std::span<const TrialResponse> responses,
                              const Grouping& grouping, const BootstrapConfig& bootstrap) {
  ScoringOutcome outcome;
  std::map<std::string, const Trial*> by_id;
  for (const auto& t : trials) {
    if (!by_id.emplace(t.trial_id, &t).second) {
      throw Error(ErrorCode::kFormat, "duplicate trial_id '" + t.trial_id + "'");
    }
  }

  std::map<std::string, std::vector<ScoredResponse>> by_listener;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : responses) {
    const auto it = by_id.find(r.trial_id);
    if (it == by_id.end()) {
      outcome.warnings.push_back("response for unknown trial '" + r.trial_id + "' ignored");
      continue;
    }
    if (!seen.emplace(r.listener_id, r.trial_id).second) {
      outcome.warnings.push_back("duplicate response by '" + r.listener_id + "' for trial '" +
                                 r.trial_id + "' ignored");
      continue;
    }
    ScoredResponse s{*it->second, r, WordRecognitionRate(it->second->reference_text, r.transcript)};
    by_listener[r.listener_id].push_back(std::move(s));
  }

  std::vector<ScoredResponse> qualified;
  for (auto& [listener, scored] : by_listener) {
    ListenerSummary summary;
    summary.listener_id = listener;
    summary.qualification = Qualify(scored);
    summary.device = scored.front().response.device;
    if (summary.qualification.status == Qualification::Status::kQualified) {
      qualified.insert(qualified.end(), scored.begin(), scored.end());
    } else if (summary.qualification.status == Qualification::Status::kIndeterminate) {
      outcome.warnings.push_back("listener '" + listener + "' has no " +
                                 (summary.qualification.n_reference == 0 ? "reference" : "test") +
                                 " responses; excluded");
    }
    outcome.listeners.push_back(std::move(summary));
  }

  outcome.reports = Aggregate(qualified, grouping, bootstrap);
  outcome.device_reports = Aggregate(qualified, Grouping{false, false, false, false, true}, bootstrap);
  return outcome;
}

}  // namespace effortlab::eval

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace effortlab::eval {

enum class AudioDevice { kEarbuds, kHeadphones, kSpeakers };

std::string_view ToString(AudioDevice device);
AudioDevice ParseAudioDevice(std::string_view name);

struct Trial {
  std::string trial_id;
  std::string utterance_id;
  std::string reference_text;
  std::string system;
  std::string voice;
  std::string masker;  // masker kind, "none" for clean reference trials
  double snr_db = 0.0;
  bool is_reference = false;
  std::string path;  // stimulus audio, relative to the manifest
};

struct TrialResponse {
  std::string trial_id;
  std::string listener_id;
  std::string transcript;
  AudioDevice device = AudioDevice::kHeadphones;
  std::string timestamp;
};

// One JSON object per line. Lines carrying a "type" other than "response"
// (session records in the service log) are skipped. Throws kFormat with the
// line number on malformed input.
std::vector<TrialResponse> ParseResponsesJsonl(std::string_view text);
std::string FormatResponseJson(const TrialResponse& r);

struct Qualification {
  enum class Status { kQualified, kNotQualified, kIndeterminate };
  Status status = Status::kIndeterminate;
  double reference_wrr = 0.0;
  double test_wrr = 0.0;
  std::size_t n_reference = 0;
  std::size_t n_test = 0;
};

std::string_view ToString(Qualification::Status status);

struct ScoredResponse {
  Trial trial;
  TrialResponse response;
  double wrr = 0.0;
};

// Mean WRR on reference trials must reach 0.80 and mean WRR on test trials
// must exceed 0.10. Without both kinds of trials the status is
// indeterminate.
Qualification Qualify(std::span<const ScoredResponse> listener_responses);
Qualification QualifyMeans(double reference_wrr, std::size_t n_reference, double test_wrr,
                           std::size_t n_test);

struct Grouping {
  bool system = true;
  bool voice = true;
  bool masker = true;
  bool snr = true;
  bool device = false;
};

// Comma-separated subset of system,voice,masker,snr,device.
Grouping ParseGrouping(std::string_view spec);

struct ScoreReport {
  std::vector<std::pair<std::string, std::string>> keys;  // in grouping order
  std::size_t n = 0;
  double mean_wrr = 0.0;
  double ci95 = 0.0;  // bootstrap half-width
};

struct BootstrapConfig {
  int resamples = 1000;
  std::uint64_t seed = 0;
};

// Percentile bootstrap of the mean; returns the half-width of the 95%
// interval. Deterministic in (values, seed).
double BootstrapHalfWidth(std::span<const double> values, const BootstrapConfig& config);

// Mean WRR per group of test (non-reference) responses, with bootstrap CIs.
// Groups are ordered by key.
std::vector<ScoreReport> Aggregate(std::span<const ScoredResponse> responses, const Grouping& grouping,
                                   const BootstrapConfig& bootstrap = {});

std::string FormatReportCsv(std::span<const ScoreReport> reports, const Grouping& grouping);

struct ListenerSummary {
  std::string listener_id;
  Qualification qualification;
  std::optional<AudioDevice> device;
};

struct ScoringOutcome {
  std::vector<ListenerSummary> listeners;
  std::vector<ScoreReport> reports;         // qualified listeners only
  std::vector<ScoreReport> device_reports;  // qualified listeners, by device
  std::vector<std::string> warnings;
};

// Full offline pipeline shared by the CLI and the listening-test service:
// score every response, qualify each listener, aggregate over qualified
// listeners.
ScoringOutcome ScoreResponses(std::span<const Trial> trials, std::span<const TrialResponse> responses,
                              const Grouping& grouping, const BootstrapConfig& bootstrap = {});

}  // namespace effortlab::eval

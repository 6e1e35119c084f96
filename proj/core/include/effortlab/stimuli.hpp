#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "effortlab/enhance.hpp"
#include "effortlab/noise.hpp"
#include "effortlab/scoring.hpp"
#include "effortlab/tilt.hpp"

namespace effortlab::stimuli {

enum class Method { kNone, kSs, kDrc, kSsdrc, kEffort };

std::string_view ToString(Method method);
Method ParseMethod(std::string_view name);

struct SystemSpec {
  std::string label;
  Method method = Method::kNone;
  double bias = 0.0;                           // effort only
  std::filesystem::path stats;                 // effort only
  std::filesystem::path config;                // enhancer key-value file, optional
};

struct MaskerPlan {
  std::string label;  // unique; used in file names and as the trial's masker
  noise::MaskerKind kind = noise::MaskerKind::kSpeechShapedNoise;
  std::vector<std::filesystem::path> sources;
  int lp_order = 20;
  std::vector<double> snrs;
};

struct UtteranceSpec {
  std::string id;
  std::string text;
  std::filesystem::path audio;
  std::string voice;  // defaults to the plan voice
};

// Batch description read from JSON. Relative paths resolve against the plan
// file's directory. Schema: docs/manifest.md.
struct Plan {
  std::uint64_t seed = 0;
  int sample_rate = 16000;
  std::string voice = "voice1";
  std::vector<UtteranceSpec> utterances;
  std::vector<SystemSpec> systems;
  std::vector<MaskerPlan> maskers;
  std::string reference_system;                 // empty: no reference trials
  std::vector<std::string> reference_utterances;
  std::optional<double> target_level_db = -26.0;
  bool headroom = true;
  double lead_s = 0.5;
  double lag_s = 0.5;
};

// Throws kFormat for malformed JSON or schema violations.
Plan ParsePlan(std::string_view json_text, const std::filesystem::path& base_dir = {});
Plan LoadPlan(const std::filesystem::path& path);

struct ManifestTrial {
  eval::Trial trial;
  std::uint64_t seed = 0;
};

struct ErrorRow {
  std::string trial_id;
  std::string utterance_id;
  std::string system;
  std::string masker;
  double snr_db = 0.0;
  std::string message;
};

struct Manifest {
  int version = 1;
  std::uint64_t seed = 0;
  int sample_rate = 16000;
  std::vector<ManifestTrial> trials;
  std::vector<ErrorRow> errors;

  std::vector<eval::Trial> Trials() const;
};

std::string FormatManifest(const Manifest& manifest);
// Throws kFormat (malformed manifest) naming the offending field.
Manifest ParseManifest(std::string_view json_text);
Manifest LoadManifest(const std::filesystem::path& path);

// "t" + 16 hex digits of a hash over the seed and the trial's coordinates.
std::string MakeTrialId(std::uint64_t seed, std::string_view utterance, std::string_view system,
                        std::string_view masker, std::string_view snr);
std::string TrialFileName(std::string_view utterance, std::string_view system,
                          std::string_view masker, std::optional<double> snr_db);
std::string FormatSnr(double snr_db);

struct GenerateOptions {
  int jobs = 1;
};

// Enumerates the cross product over the non-reference utterances plus one
// clean trial per reference utterance, writes
// one 16-bit WAV per trial into out_dir and returns the manifest (also
// written to out_dir/manifest.json). A trial whose inputs fail becomes an
// error row; the rest still run. Output bytes do not depend on `jobs`.
Manifest GenerateStimuli(const Plan& plan, const std::filesystem::path& out_dir,
                         const GenerateOptions& options = {});

}  // namespace effortlab::stimuli

#include "effortlab/stimuli.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "effortlab/effort.hpp"
#include "effortlab/error.hpp"
#include "effortlab/file_util.hpp"
#include "effortlab/keyvalue.hpp"
#include "effortlab/level.hpp"
#include "effortlab/mix.hpp"
#include "effortlab/parallel.hpp"
#include "effortlab/resample.hpp"
#include "effortlab/wav_io.hpp"

namespace effortlab::stimuli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double kPeakCeiling = 0.99;
constexpr double kMinSsnSeconds = 10.0;

[[noreturn]] void Malformed(const std::string& what) { throw Error(ErrorCode::kFormat, what); }

bool SafeLabel(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_' || c == '.';
  });
}

fs::path Resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

template <typename T>
T Field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) Malformed(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    Malformed(where + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
T FieldOr(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return Field<T>(j, key, where);
}

Waveform LoadAt(const fs::path& path, int rate) {
  Waveform w = wav::Read(path);
  if (w.sample_rate != rate) w = signal::Resample(w, rate);
  return w;
}

// Scale so the peak stays below full scale; the ratio of components is kept.
double HeadroomGain(const Waveform& w) {
  const double peak = PeakAbs(w.samples);
  return peak > kPeakCeiling ? kPeakCeiling / peak : 1.0;
}

Waveform Process(const Waveform& w, const SystemSpec& system) {
  enhance::EnhancerConfig config;
  if (!system.config.empty()) config = enhance::ParseEnhancerConfig(ReadTextFile(system.config));
  switch (system.method) {
    case Method::kNone: return w;
    case Method::kSs: return enhance::SpectralShaping(w, config.shaper);
    case Method::kDrc:
      return enhance::EqualPowerNormalize(enhance::Drc(w, config.drc), w).output;
    case Method::kSsdrc: return enhance::Ssdrc(w, config);
    case Method::kEffort: {
      const tilt::TiltStats stats = tilt::ParseStats(ReadTextFile(system.stats));
      return effort::ApplyEffort(w, {system.bias, stats}).output;
    }
  }
  return w;
}

std::string TrialKey(const std::string& utt, const std::string& system) { return utt + "\x1f" + system; }

}  // namespace

std::string_view ToString(Method method) {
  switch (method) {
    case Method::kNone: return "none";
    case Method::kSs: return "ss";
    case Method::kDrc: return "drc";
    case Method::kSsdrc: return "ssdrc";
    case Method::kEffort: return "effort";
  }
  return "none";
}

Method ParseMethod(std::string_view name) {
  if (name == "none") return Method::kNone;
  if (name == "ss") return Method::kSs;
  if (name == "drc") return Method::kDrc;
  if (name == "ssdrc") return Method::kSsdrc;
  if (name == "effort") return Method::kEffort;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown method '" + std::string(name) + "' (none, ss, drc, ssdrc, effort)");
}

std::string FormatSnr(double snr_db) { return FormatDouble(snr_db); }

std::string MakeTrialId(std::uint64_t seed, std::string_view utterance, std::string_view system,
                        std::string_view masker, std::string_view snr) {
  std::uint64_t h = Fnv1a64(std::to_string(seed));
  for (std::string_view part : {utterance, system, masker, snr}) {
    h = Fnv1a64(part, h);
    h = Fnv1a64("\x1f", h);
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "t%016" PRIx64, h);
  return buf;
}

std::string TrialFileName(std::string_view utterance, std::string_view system, std::string_view masker,
                          std::optional<double> snr_db) {
  std::string name = std::string(utterance) + "_" + std::string(system) + "_" + std::string(masker) + "_";
  name += snr_db ? FormatSnr(*snr_db) : std::string("clean");
  return name + ".wav";
}

Plan ParsePlan(std::string_view json_text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    Malformed(std::string("plan is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) Malformed("plan must be a JSON object");
  Plan plan;
  plan.seed = FieldOr<std::uint64_t>(j, "seed", 0, "plan");
  plan.sample_rate = FieldOr<int>(j, "sample_rate", 16000, "plan");
  plan.voice = FieldOr<std::string>(j, "voice", "voice1", "plan");
  plan.headroom = FieldOr<bool>(j, "headroom", true, "plan");
  plan.lead_s = FieldOr<double>(j, "lead_s", 0.5, "plan");
  plan.lag_s = FieldOr<double>(j, "lag_s", 0.5, "plan");
  if (j.contains("target_level_db")) {
    plan.target_level_db = j.at("target_level_db").is_null()
                               ? std::nullopt
                               : std::optional<double>(Field<double>(j, "target_level_db", "plan"));
  }
  if (plan.sample_rate <= 0) Malformed("plan: sample_rate must be positive");

  std::set<std::string> ids;
  for (const auto& u : Field<json>(j, "utterances", "plan")) {
    UtteranceSpec spec;
    spec.id = Field<std::string>(u, "id", "utterance");
    const std::string where = "utterance '" + spec.id + "'";
    spec.text = Field<std::string>(u, "text", where);
    spec.audio = Resolve(base_dir, Field<std::string>(u, "audio", where));
    spec.voice = FieldOr<std::string>(u, "voice", plan.voice, where);
    if (!SafeLabel(spec.id)) Malformed(where + ": id must be [A-Za-z0-9._-]+");
    if (spec.text.empty()) Malformed(where + ": empty text");
    if (!ids.insert(spec.id).second) Malformed(where + ": duplicate id");
    plan.utterances.push_back(std::move(spec));
  }

  std::set<std::string> labels;
  for (const auto& s : Field<json>(j, "systems", "plan")) {
    SystemSpec spec;
    const std::string method = Field<std::string>(s, "method", "system");
    try {
      spec.method = ParseMethod(method);
    } catch (const Error& e) {
      Malformed(std::string("system: ") + e.what());
    }
    spec.label = FieldOr<std::string>(s, "label", method, "system");
    const std::string where = "system '" + spec.label + "'";
    if (!SafeLabel(spec.label)) Malformed(where + ": label must be [A-Za-z0-9._-]+");
    if (!labels.insert(spec.label).second) Malformed(where + ": duplicate label");
    if (s.contains("config")) spec.config = Resolve(base_dir, Field<std::string>(s, "config", where));
    if (spec.method == Method::kEffort) {
      spec.bias = Field<double>(s, "bias", where);
      spec.stats = Resolve(base_dir, Field<std::string>(s, "stats", where));
    }
    plan.systems.push_back(std::move(spec));
  }

  std::set<std::string> masker_labels;
  for (const auto& m : Field<json>(j, "maskers", "plan")) {
    MaskerPlan spec;
    const std::string kind = Field<std::string>(m, "kind", "masker");
    try {
      spec.kind = noise::ParseMaskerKind(kind);
    } catch (const Error& e) {
      Malformed(std::string("masker: ") + e.what());
    }
    spec.label = FieldOr<std::string>(
        m, "label", spec.kind == noise::MaskerKind::kSpeechShapedNoise ? "ssn" : "cs", "masker");
    const std::string where = "masker '" + spec.label + "'";
    if (!SafeLabel(spec.label) || spec.label == "none") {
      Malformed(where + ": label must be [A-Za-z0-9._-]+ and not 'none'");
    }
    if (!masker_labels.insert(spec.label).second) Malformed(where + ": duplicate label");
    for (const auto& src : Field<std::vector<std::string>>(m, "sources", where)) {
      spec.sources.push_back(Resolve(base_dir, src));
    }
    spec.lp_order = FieldOr<int>(m, "lp_order", 20, where);
    spec.snrs = Field<std::vector<double>>(m, "snrs", where);
    if (spec.sources.empty()) Malformed(where + ": needs at least one source");
    if (spec.snrs.empty()) Malformed(where + ": needs at least one SNR");
    if (spec.kind == noise::MaskerKind::kSpeechShapedNoise && spec.lp_order < 2) {
      Malformed(where + ": lp_order must be at least 2");
    }
    plan.maskers.push_back(std::move(spec));
  }

  if (j.contains("reference") && !j.at("reference").is_null()) {
    const json& r = j.at("reference");
    plan.reference_system = Field<std::string>(r, "system", "reference");
    plan.reference_utterances = Field<std::vector<std::string>>(r, "utterances", "reference");
    if (!labels.count(plan.reference_system)) {
      Malformed("reference: unknown system '" + plan.reference_system + "'");
    }
    std::set<std::string> seen;
    for (const auto& id : plan.reference_utterances) {
      if (!ids.count(id)) Malformed("reference: unknown utterance '" + id + "'");
      if (!seen.insert(id).second) Malformed("reference: duplicate utterance '" + id + "'");
    }
  }
  if (plan.utterances.empty()) Malformed("plan: no utterances");
  if (plan.systems.empty()) Malformed("plan: no systems");
  if (plan.lead_s < 0.0 || plan.lag_s < 0.0) Malformed("plan: lead_s and lag_s must be >= 0");
  return plan;
}

Plan LoadPlan(const fs::path& path) {
  return ParsePlan(ReadTextFile(path), path.parent_path());
}

std::vector<eval::Trial> Manifest::Trials() const {
  std::vector<eval::Trial> out;
  out.reserve(trials.size());
  for (const auto& t : trials) out.push_back(t.trial);
  return out;
}

std::string FormatManifest(const Manifest& m) {
  ordered_json j;
  j["version"] = m.version;
  j["seed"] = m.seed;
  j["sample_rate"] = m.sample_rate;
  j["trials"] = ordered_json::array();
  for (const auto& mt : m.trials) {
    const eval::Trial& t = mt.trial;
    ordered_json row;
    row["trial_id"] = t.trial_id;
    row["utterance_id"] = t.utterance_id;
    row["system"] = t.system;
    row["voice"] = t.voice;
    row["masker"] = t.masker;
    row["snr_db"] = t.snr_db;
    row["seed"] = mt.seed;
    row["reference_text"] = t.reference_text;
    row["path"] = t.path;
    row["is_reference"] = t.is_reference;
    j["trials"].push_back(std::move(row));
  }
  j["errors"] = ordered_json::array();
  for (const auto& e : m.errors) {
    ordered_json row;
    row["trial_id"] = e.trial_id;
    row["utterance_id"] = e.utterance_id;
    row["system"] = e.system;
    row["masker"] = e.masker;
    row["snr_db"] = e.snr_db;
    row["message"] = e.message;
    j["errors"].push_back(std::move(row));
  }
  return j.dump(2) + "\n";
}

Manifest ParseManifest(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    Malformed(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) Malformed("manifest must be a JSON object");
  Manifest m;
  m.version = Field<int>(j, "version", "manifest");
  if (m.version != 1) Malformed("manifest: unsupported version " + std::to_string(m.version));
  m.seed = FieldOr<std::uint64_t>(j, "seed", 0, "manifest");
  m.sample_rate = FieldOr<int>(j, "sample_rate", 16000, "manifest");
  std::set<std::string> ids;
  for (const auto& row : Field<json>(j, "trials", "manifest")) {
    ManifestTrial mt;
    eval::Trial& t = mt.trial;
    t.trial_id = Field<std::string>(row, "trial_id", "trial");
    const std::string where = "trial '" + t.trial_id + "'";
    t.utterance_id = Field<std::string>(row, "utterance_id", where);
    t.system = Field<std::string>(row, "system", where);
    t.voice = FieldOr<std::string>(row, "voice", "", where);
    t.masker = Field<std::string>(row, "masker", where);
    t.snr_db = FieldOr<double>(row, "snr_db", 0.0, where);
    t.reference_text = Field<std::string>(row, "reference_text", where);
    t.path = Field<std::string>(row, "path", where);
    t.is_reference = FieldOr<bool>(row, "is_reference", false, where);
    mt.seed = FieldOr<std::uint64_t>(row, "seed", 0, where);
    if (t.trial_id.empty()) Malformed("manifest: empty trial_id");
    if (t.reference_text.empty()) Malformed(where + ": empty reference_text");
    if (!ids.insert(t.trial_id).second) Malformed(where + ": duplicate trial_id");
    m.trials.push_back(std::move(mt));
  }
  if (j.contains("errors")) {
    for (const auto& row : j.at("errors")) {
      ErrorRow e;
      e.trial_id = FieldOr<std::string>(row, "trial_id", "", "error row");
      e.utterance_id = FieldOr<std::string>(row, "utterance_id", "", "error row");
      e.system = FieldOr<std::string>(row, "system", "", "error row");
      e.masker = FieldOr<std::string>(row, "masker", "", "error row");
      e.snr_db = FieldOr<double>(row, "snr_db", 0.0, "error row");
      e.message = FieldOr<std::string>(row, "message", "", "error row");
      m.errors.push_back(std::move(e));
    }
  }
  return m;
}

Manifest LoadManifest(const fs::path& path) { return ParseManifest(ReadTextFile(path)); }

Manifest GenerateStimuli(const Plan& plan, const fs::path& out_dir, const GenerateOptions& options) {
  fs::create_directories(out_dir);

  struct Job {
    ManifestTrial row;
    const UtteranceSpec* utterance = nullptr;
    const SystemSpec* system = nullptr;
    const MaskerPlan* masker = nullptr;  // null for clean reference trials
    std::string error;
  };
  std::vector<Job> jobs;
  std::map<std::string, const SystemSpec*> systems;
  for (const auto& s : plan.systems) systems[s.label] = &s;
  std::map<std::string, const UtteranceSpec*> utterances;
  for (const auto& u : plan.utterances) utterances[u.id] = &u;

  auto add_job = [&](const UtteranceSpec& u, const SystemSpec& s, const MaskerPlan* m, double snr) {
    Job job;
    eval::Trial& t = job.row.trial;
    const std::string masker = m ? m->label : "none";
    const std::string snr_text = m ? FormatSnr(snr) : "clean";
    t.trial_id = MakeTrialId(plan.seed, u.id, s.label, masker, snr_text);
    t.utterance_id = u.id;
    t.reference_text = u.text;
    t.system = s.label;
    t.voice = u.voice;
    t.masker = masker;
    t.snr_db = m ? snr : 0.0;
    t.is_reference = m == nullptr;
    t.path = TrialFileName(u.id, s.label, masker, m ? std::optional<double>(snr) : std::nullopt);
    job.row.seed = Fnv1a64(t.trial_id, Fnv1a64(std::to_string(plan.seed)));
    job.utterance = &u;
    job.system = &s;
    job.masker = m;
    jobs.push_back(std::move(job));
  };
  // Reference utterances are heard clean only.
  const std::set<std::string> reference_ids(plan.reference_utterances.begin(), plan.reference_utterances.end());
  for (const auto& u : plan.utterances) {
    if (reference_ids.count(u.id)) continue;
    for (const auto& s : plan.systems) {
      for (const auto& m : plan.maskers) {
        for (double snr : m.snrs) add_job(u, s, &m, snr);
      }
    }
  }
  for (const auto& id : plan.reference_utterances) {
    add_job(*utterances.at(id), *systems.at(plan.reference_system), nullptr, 0.0);
  }

  // Stage 1: load and process each (utterance, system) pair once.
  std::map<std::string, std::size_t> pair_index;
  std::vector<std::pair<const UtteranceSpec*, const SystemSpec*>> pairs;
  for (const auto& job : jobs) {
    const std::string key = TrialKey(job.utterance->id, job.system->label);
    if (pair_index.emplace(key, pairs.size()).second) pairs.emplace_back(job.utterance, job.system);
  }
  std::map<std::string, std::size_t> utt_index;
  std::vector<const UtteranceSpec*> utt_list;
  for (const auto& [u, s] : pairs) {
    if (utt_index.emplace(u->id, utt_list.size()).second) utt_list.push_back(u);
  }
  std::vector<Waveform> sources(utt_list.size());
  std::vector<std::string> source_errors(utt_list.size());
  ParallelFor(utt_list.size(), options.jobs, [&](std::size_t i) {
    try {
      sources[i] = LoadAt(utt_list[i]->audio, plan.sample_rate);
    } catch (const std::exception& e) {
      source_errors[i] = e.what();
    }
  });
  std::vector<Waveform> processed(pairs.size());
  std::vector<std::string> pair_errors(pairs.size());
  ParallelFor(pairs.size(), options.jobs, [&](std::size_t i) {
    const std::size_t ui = utt_index.at(pairs[i].first->id);
    if (!source_errors[ui].empty()) {
      pair_errors[i] = source_errors[ui];
      return;
    }
    try {
      processed[i] = Process(sources[ui], *pairs[i].second);
    } catch (const std::exception& e) {
      pair_errors[i] = std::string(ToString(pairs[i].second->method)) + ": " + e.what();
    }
  });

  // Stage 2: maskers, long enough for the longest processed utterance.
  std::size_t longest = 0;
  for (const auto& w : processed) longest = std::max(longest, w.size());
  const auto pad = static_cast<std::size_t>(std::lround((plan.lead_s + plan.lag_s) * plan.sample_rate));
  std::vector<Waveform> maskers(plan.maskers.size());
  std::vector<std::string> masker_errors(plan.maskers.size());
  ParallelFor(plan.maskers.size(), options.jobs, [&](std::size_t i) {
    const MaskerPlan& m = plan.maskers[i];
    try {
      std::vector<Waveform> corpus;
      for (const auto& src : m.sources) {
        if (!fs::is_directory(src)) {
          corpus.push_back(LoadAt(src, plan.sample_rate));
          continue;
        }
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(src)) {
          if (entry.is_regular_file() && entry.path().extension() == ".wav") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) corpus.push_back(LoadAt(f, plan.sample_rate));
      }
      if (corpus.empty()) throw Error(ErrorCode::kNotFound, "no masker audio");
      if (m.kind == noise::MaskerKind::kCompetingSpeaker) {
        Waveform joined({}, plan.sample_rate);
        for (const auto& w : corpus) joined.samples.insert(joined.samples.end(), w.samples.begin(), w.samples.end());
        maskers[i] = std::move(joined);
      } else {
        noise::SsnConfig config;
        config.lp_order = m.lp_order;
        config.seed = Fnv1a64(m.label, Fnv1a64(std::to_string(plan.seed)));
        config.sample_rate = plan.sample_rate;
        config.duration_s = std::max(kMinSsnSeconds, static_cast<double>(longest + pad) / plan.sample_rate + 1.0);
        maskers[i] = noise::MakeSpeechShapedNoise(corpus, config);
      }
    } catch (const std::exception& e) {
      masker_errors[i] = "masker '" + m.label + "': " + e.what();
    }
  });

  // Stage 3: mix and write each trial.
  noise::MixRecipe base;
  base.lead_s = plan.lead_s;
  base.lag_s = plan.lag_s;
  base.target_level_db = plan.target_level_db;
  base.headroom = plan.headroom;
  ParallelFor(jobs.size(), options.jobs, [&](std::size_t i) {
    Job& job = jobs[i];
    const std::size_t pi = pair_index.at(TrialKey(job.utterance->id, job.system->label));
    if (!pair_errors[pi].empty()) {
      job.error = pair_errors[pi];
      return;
    }
    try {
      Waveform out;
      if (job.masker == nullptr) {
        out = processed[pi];
        if (plan.target_level_db) {
          out = Scaled(out, DbToAmplitude(*plan.target_level_db - noise::ActiveSpeechLevel(out)));
        }
        if (plan.headroom) out = Scaled(out, HeadroomGain(out));
      } else {
        const std::size_t mi = static_cast<std::size_t>(job.masker - plan.maskers.data());
        if (!masker_errors[mi].empty()) throw Error(ErrorCode::kIo, masker_errors[mi]);
        noise::MixRecipe recipe = base;
        recipe.snr_db = job.row.trial.snr_db;
        const Waveform& target = processed[pi];
        const std::size_t needed = target.size() + pad;
        const std::size_t offset =
            noise::MaskerOffsetForTrial(job.row.trial.trial_id, maskers[mi].size(), needed, plan.seed);
        out = noise::MixAtSnr(target, maskers[mi], recipe, offset).mixture;
      }
      wav::Write(out_dir / job.row.trial.path, out, wav::SampleFormat::kPcm16);
    } catch (const std::exception& e) {
      job.error = e.what();
    }
  });

  Manifest manifest;
  manifest.seed = plan.seed;
  manifest.sample_rate = plan.sample_rate;
  for (auto& job : jobs) {
    if (job.error.empty()) {
      manifest.trials.push_back(std::move(job.row));
    } else {
      const eval::Trial& t = job.row.trial;
      manifest.errors.push_back({t.trial_id, t.utterance_id, t.system, t.masker, t.snr_db, job.error});
    }
  }
  WriteFileAtomic(out_dir / "manifest.json", FormatManifest(manifest));
  return manifest;
}

}  // namespace effortlab::stimuli

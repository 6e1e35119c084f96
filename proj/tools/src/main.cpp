// effortlab command-line tool.

#include <httplib.h>

#include <CLI11.hpp>
#include <algorithm>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "effortlab/effort.hpp"
#include "effortlab/enhance.hpp"
#include "effortlab/error.hpp"
#include "effortlab/file_util.hpp"
#include "effortlab/keyvalue.hpp"
#include "effortlab/level.hpp"
#include "effortlab/ltas.hpp"
#include "effortlab/mix.hpp"
#include "effortlab/noise.hpp"
#include "effortlab/parallel.hpp"
#include "effortlab/scoring.hpp"
#include "effortlab/service.hpp"
#include "effortlab/stimuli.hpp"
#include "effortlab/synth.hpp"
#include "effortlab/tilt.hpp"
#include "effortlab/wav_io.hpp"
#include "http_server.hpp"

namespace fs = std::filesystem;
using namespace effortlab;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitMissingInput = 3;
constexpr int kExitMalformed = 4;

struct MissingInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void RequireExists(const fs::path& p) {
  if (!fs::exists(p)) throw MissingInput("input not found: " + p.string());
}

// A file, or every *.wav directly inside a directory (sorted).
std::vector<fs::path> WavInputs(const fs::path& in) {
  RequireExists(in);
  if (!fs::is_directory(in)) return {in};
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(in)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw MissingInput("no .wav files in " + in.string());
  return files;
}

std::vector<Waveform> LoadAll(const std::vector<fs::path>& files, int jobs) {
  std::vector<Waveform> out(files.size());
  std::vector<std::string> errors(files.size());
  ParallelFor(files.size(), jobs, [&](std::size_t i) {
    try {
      out[i] = wav::Read(files[i]);
    } catch (const std::exception& e) {
      errors[i] = files[i].string() + ": " + e.what();
    }
  });
  for (const auto& e : errors) {
    if (!e.empty()) throw Error(ErrorCode::kFormat, e);
  }
  return out;
}

std::uint64_t ResolveSeed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("EFFORTLAB_SEED"); env != nullptr && *env != '\0') {
    return static_cast<std::uint64_t>(ParseInteger(env, "EFFORTLAB_SEED"));
  }
  return 0;
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    WriteFileAtomic(path, text);
  }
}

std::string Fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

struct Common {
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

void AddCommon(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed (default: $EFFORTLAB_SEED, else 0)");
  cmd->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

// ---- subcommands ----------------------------------------------------------

struct AnalyzeTiltArgs {
  Common common;
  fs::path in, stats_out, csv_out, norm_stats;
  double highpass_hz = 70.0;
};

int AnalyzeTilt(const AnalyzeTiltArgs& a) {
  const auto files = WavInputs(a.in);
  if (!a.norm_stats.empty()) RequireExists(a.norm_stats);
  std::optional<tilt::TiltStats> norm;
  if (!a.norm_stats.empty()) norm = tilt::ParseStats(ReadTextFile(a.norm_stats));
  tilt::TiltAnalysisConfig config;
  config.highpass_hz = a.highpass_hz;

  std::vector<tilt::UtteranceTilt> results(files.size());
  std::vector<std::string> errors(files.size());
  ParallelFor(files.size(), a.common.jobs, [&](std::size_t i) {
    try {
      results[i] = tilt::AnalyzeUtterance(wav::Read(files[i]), config);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  std::string csv = norm ? "file,tilt,voiced_frames,total_frames,normalized\n"
                         : "file,tilt,voiced_frames,total_frames\n";
  std::vector<double> tilts;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!errors[i].empty()) {
      std::cerr << "warning: " << files[i].string() << ": " << errors[i] << "\n";
      continue;
    }
    tilts.push_back(results[i].tilt);
    csv += files[i].filename().string() + "," + Fixed4(results[i].tilt) + "," +
           std::to_string(results[i].voiced_frames) + "," + std::to_string(results[i].total_frames);
    if (norm) csv += "," + Fixed4(norm->Normalize(results[i].tilt));
    csv += "\n";
  }
  if (tilts.empty()) throw Error(ErrorCode::kNoVoicing, "no analyzable utterances");
  if (!a.stats_out.empty()) WriteText(a.stats_out, tilt::FormatStats(tilt::FitNormalizer(tilts)));
  if (!a.csv_out.empty() || a.stats_out.empty()) WriteText(a.csv_out, csv);
  return 0;
}

struct FitStatsArgs {
  fs::path in, out;
  std::optional<double> lo, hi;
};

int FitStats(const FitStatsArgs& a) {
  tilt::TiltStats stats;
  if (a.lo || a.hi) {
    if (!a.lo || !a.hi) throw Error(ErrorCode::kInvalidArgument, "--lo and --hi go together");
    stats = tilt::TiltStats::FromRange(*a.lo, *a.hi);
  } else {
    if (a.in.empty()) throw Error(ErrorCode::kInvalidArgument, "give --in tilts.csv or --lo/--hi");
    RequireExists(a.in);
    // Accepts analyze-tilt CSV output or one value per line.
    std::istringstream text(ReadTextFile(a.in));
    std::string line;
    std::vector<double> values;
    int column = -1;
    bool first = true;
    while (std::getline(text, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
      if (first) {
        first = false;
        const auto it = std::find(cells.begin(), cells.end(), "tilt");
        if (it != cells.end()) {
          column = static_cast<int>(it - cells.begin());
          continue;
        }
        column = 0;
      }
      if (column >= static_cast<int>(cells.size())) throw Error(ErrorCode::kFormat, "short row: " + line);
      values.push_back(ParseDouble(cells[static_cast<std::size_t>(column)], "tilt"));
    }
    stats = tilt::FitNormalizer(values);
  }
  WriteText(a.out, tilt::FormatStats(stats));
  return 0;
}

struct ApplyEffortArgs {
  fs::path in, out, stats, curve;
  double bias = 0.0;
  std::string sweep;
};

int ApplyEffortCmd(const ApplyEffortArgs& a) {
  RequireExists(a.in);
  RequireExists(a.stats);
  const Waveform w = wav::Read(a.in);
  const tilt::TiltStats stats = tilt::ParseStats(ReadTextFile(a.stats));
  if (!a.sweep.empty()) {
    const auto targets = ParseDoubleList(a.sweep, "--sweep");
    const effort::ResponseCurve curve = effort::MeasureResponseCurve(w, targets, stats);
    for (const auto& p : curve.points) {
      if (!p.converged) std::cerr << "warning: " << p.error << "\n";
    }
    WriteText(a.curve, effort::FormatResponseCsv(curve));
    return 0;
  }
  if (a.out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required without --sweep");
  const effort::EffortResult r = effort::ApplyEffort(w, {a.bias, stats});
  wav::Write(a.out, r.output, wav::SampleFormat::kFloat32);
  std::cout << "input " << Fixed4(r.input_normalized) << " target " << Fixed4(r.target_normalized)
            << " achieved " << Fixed4(r.achieved_normalized) << " iterations " << r.iterations << "\n";
  return 0;
}

struct EnhanceArgs {
  fs::path in, out, config;
  std::string method = "ssdrc";
};

int EnhanceCmd(const EnhanceArgs& a) {
  RequireExists(a.in);
  if (!a.config.empty()) RequireExists(a.config);
  const Waveform w = wav::Read(a.in);
  enhance::EnhancerConfig config;
  if (!a.config.empty()) config = enhance::ParseEnhancerConfig(ReadTextFile(a.config));
  Waveform out;
  if (a.method == "ss") {
    out = enhance::SpectralShaping(w, config.shaper);
  } else if (a.method == "drc") {
    out = enhance::EqualPowerNormalize(enhance::Drc(w, config.drc), w).output;
  } else if (a.method == "ssdrc") {
    out = enhance::Ssdrc(w, config);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "--method must be ss, drc or ssdrc");
  }
  if (PeakAbs(out.samples) > 1.0) std::cerr << "warning: output exceeds full scale\n";
  wav::Write(a.out, out, wav::SampleFormat::kFloat32);
  return 0;
}

struct LtasArgs {
  Common common;
  fs::path in, out;
};

int LtasCmd(const LtasArgs& a) {
  const auto corpus = LoadAll(WavInputs(a.in), a.common.jobs);
  tilt::LtasConfig config;
  config.sample_rate = corpus.front().sample_rate;
  const tilt::LtasCurve curve = tilt::Ltas(corpus, config);
  std::string csv = "band_hz,level_db\n";
  for (std::size_t i = 0; i < curve.band_hz.size(); ++i) {
    csv += Fixed4(curve.band_hz[i]) + "," + Fixed4(curve.level_db[i]) + "\n";
  }
  WriteText(a.out, csv);
  return 0;
}

struct MakeSsnArgs {
  Common common;
  fs::path ref, out;
  double duration_s = 10.0;
  int lp_order = 20;
  int sample_rate = 16000;
};

int MakeSsn(const MakeSsnArgs& a) {
  const auto corpus = LoadAll(WavInputs(a.ref), a.common.jobs);
  noise::SsnConfig config;
  config.duration_s = a.duration_s;
  config.lp_order = a.lp_order;
  config.sample_rate = a.sample_rate;
  config.seed = ResolveSeed(a.common.seed);
  wav::Write(a.out, noise::MakeSpeechShapedNoise(corpus, config), wav::SampleFormat::kPcm16);
  return 0;
}

struct MixArgs {
  Common common;
  fs::path in, masker, out;
  double snr_db = 0.0;
  double lead_s = 0.5, lag_s = 0.5;
  std::optional<double> target_level_db;
  bool headroom = false;
  std::string trial_id;
};

int MixCmd(const MixArgs& a) {
  RequireExists(a.in);
  RequireExists(a.masker);
  const Waveform target = wav::Read(a.in);
  const Waveform masker = wav::Read(a.masker);
  noise::MixRecipe recipe;
  recipe.snr_db = a.snr_db;
  recipe.lead_s = a.lead_s;
  recipe.lag_s = a.lag_s;
  recipe.target_level_db = a.target_level_db;
  recipe.headroom = a.headroom;
  const std::size_t needed =
      target.size() + static_cast<std::size_t>(std::lround((a.lead_s + a.lag_s) * target.sample_rate));
  const std::size_t offset =
      noise::MaskerOffsetForTrial(a.trial_id.empty() ? a.in.filename().string() : a.trial_id, masker.size(),
                                  needed, ResolveSeed(a.common.seed));
  const noise::MixResult r = noise::MixAtSnr(target, masker, recipe, offset);
  if (r.clipped) std::cerr << "warning: mixture clips (peak " << Fixed4(r.peak) << ")\n";
  wav::Write(a.out, r.mixture, wav::SampleFormat::kFloat32);
  std::cout << "snr " << Fixed4(noise::MeasureSnr(r)) << " offset " << offset << "\n";
  return 0;
}

struct GenStimuliArgs {
  Common common;
  fs::path plan, out;
};

int GenStimuli(const GenStimuliArgs& a) {
  RequireExists(a.plan);
  stimuli::Plan plan = stimuli::LoadPlan(a.plan);
  if (a.common.seed || std::getenv("EFFORTLAB_SEED")) plan.seed = ResolveSeed(a.common.seed);
  const stimuli::Manifest m = stimuli::GenerateStimuli(plan, a.out, {a.common.jobs});
  for (const auto& e : m.errors) {
    std::cerr << "error: " << e.utterance_id << "/" << e.system << "/" << e.masker << ": " << e.message << "\n";
  }
  std::cout << m.trials.size() << " stimuli, " << m.errors.size() << " errors\n";
  return m.errors.empty() ? 0 : kExitFailure;
}

struct ScoreArgs {
  Common common;
  fs::path manifest, responses, out, listeners_out;
  std::string group = "system,voice,masker,snr";
  int resamples = 1000;
};

int Score(const ScoreArgs& a) {
  RequireExists(a.manifest);
  RequireExists(a.responses);
  const stimuli::Manifest m = stimuli::LoadManifest(a.manifest);
  const auto responses = eval::ParseResponsesJsonl(ReadTextFile(a.responses));
  const eval::Grouping grouping = eval::ParseGrouping(a.group);
  const auto trials = m.Trials();
  const eval::ScoringOutcome outcome =
      eval::ScoreResponses(trials, responses, grouping, {a.resamples, ResolveSeed(a.common.seed)});
  for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
  if (!a.listeners_out.empty()) {
    std::string csv = "listener_id,status,reference_wrr,test_wrr,n_reference,n_test,device\n";
    for (const auto& l : outcome.listeners) {
      csv += l.listener_id + "," + std::string(eval::ToString(l.qualification.status)) + "," +
             Fixed4(l.qualification.reference_wrr) + "," + Fixed4(l.qualification.test_wrr) + "," +
             std::to_string(l.qualification.n_reference) + "," + std::to_string(l.qualification.n_test) + "," +
             (l.device ? std::string(eval::ToString(*l.device)) : std::string()) + "\n";
    }
    WriteText(a.listeners_out, csv);
  }
  WriteText(a.out, eval::FormatReportCsv(outcome.reports, grouping));
  return 0;
}

struct ServeArgs {
  Common common;
  fs::path manifest, audio_dir, log, ui_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t trials = 720;
  std::size_t references = 10;
};

httplib::Server* g_server = nullptr;

int Serve(const ServeArgs& a) {
  RequireExists(a.manifest);
  const fs::path audio = a.audio_dir.empty() ? a.manifest.parent_path() : a.audio_dir;
  RequireExists(audio);
  service::ServiceConfig config;
  config.seed = ResolveSeed(a.common.seed);
  config.max_test_trials = a.trials;
  config.reference_trials = a.references;
  service::ListeningTest test(stimuli::LoadManifest(a.manifest), audio, a.log, config);
  http::HttpOptions options;
  options.static_dir = a.ui_dir;
  auto server = http::MakeServer(test, options);
  g_server = server.get();
  std::signal(SIGINT, [](int) { if (g_server) g_server->stop(); });
  std::signal(SIGTERM, [](int) { if (g_server) g_server->stop(); });
  int port = a.port;
  if (port == 0) {
    port = server->bind_to_any_port(a.host);
  } else if (!server->bind_to_port(a.host, port)) {
    throw Error(ErrorCode::kIo, "cannot bind " + a.host + ":" + std::to_string(port));
  }
  std::cout << "listening on http://" << a.host << ":" << port << std::endl;
  server->listen_after_bind();
  g_server = nullptr;
  return 0;
}

struct SynthCorpusArgs {
  Common common;
  fs::path text, out;
  int voice = 1;
  double effort_spread = 0.0;
  std::string prefix = "h";
};

int SynthCorpus(const SynthCorpusArgs& a) {
  RequireExists(a.text);
  std::istringstream in(ReadTextFile(a.text));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
  }
  if (lines.empty()) throw Error(ErrorCode::kFormat, "no sentences in " + a.text.string());
  std::vector<std::string_view> views(lines.begin(), lines.end());
  const auto corpus = synth::SynthesizeCorpus(views, synth::Voice(a.voice), a.effort_spread,
                                              ResolveSeed(a.common.seed));
  fs::create_directories(a.out);
  nlohmann::ordered_json index = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "%s%02zu", a.prefix.c_str(), i + 1);
    wav::Write(a.out / (std::string(id) + ".wav"), corpus[i], wav::SampleFormat::kPcm16);
    index.push_back({{"id", id}, {"text", lines[i]}, {"audio", std::string(id) + ".wav"}});
  }
  WriteFileAtomic(a.out / "utterances.json", index.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"effortlab: vocal-effort analysis, intelligibility enhancement and listening tests"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "effortlab 0.1.0");

  AnalyzeTiltArgs tilt_args;
  auto* c_tilt = app.add_subcommand("analyze-tilt", "Per-utterance spectral tilt; optional corpus stats");
  c_tilt->add_option("--in", tilt_args.in, "WAV file or directory")->required();
  c_tilt->add_option("--stats", tilt_args.stats_out, "Write fitted corpus stats here");
  c_tilt->add_option("--csv", tilt_args.csv_out, "Per-file CSV (default stdout)");
  c_tilt->add_option("--normalize-with", tilt_args.norm_stats, "Stats file for a normalized column");
  c_tilt->add_option("--highpass", tilt_args.highpass_hz, "High-pass cutoff in Hz, 0 disables");
  AddCommon(c_tilt, tilt_args.common);

  FitStatsArgs fit_args;
  auto* c_fit = app.add_subcommand("fit-stats", "Tilt normalizer from per-utterance tilts or a published range");
  c_fit->add_option("--in", fit_args.in, "CSV with a 'tilt' column, or one value per line");
  c_fit->add_option("--lo", fit_args.lo, "Published M - 3 sigma");
  c_fit->add_option("--hi", fit_args.hi, "Published M + 3 sigma");
  c_fit->add_option("--out", fit_args.out, "Stats file (default stdout)");

  ApplyEffortArgs effort_args;
  auto* c_effort = app.add_subcommand("apply-effort", "Shift normalized spectral tilt by a bias");
  c_effort->add_option("--in", effort_args.in, "Input WAV")->required();
  c_effort->add_option("--stats", effort_args.stats, "Tilt stats of the talker")->required();
  c_effort->add_option("--out", effort_args.out, "Output WAV (float32)");
  c_effort->add_option("--bias", effort_args.bias, "Normalized tilt offset, e.g. 3");
  c_effort->add_option("--sweep", effort_args.sweep, "Comma-separated biases; writes a response curve");
  c_effort->add_option("--curve", effort_args.curve, "Response-curve CSV (default stdout)");

  EnhanceArgs enhance_args;
  auto* c_enh = app.add_subcommand("enhance", "SS, DRC or SSDRC enhancement");
  c_enh->add_option("--method", enhance_args.method, "ss, drc or ssdrc")->check(CLI::IsMember({"ss", "drc", "ssdrc"}));
  c_enh->add_option("--in", enhance_args.in)->required();
  c_enh->add_option("--out", enhance_args.out)->required();
  c_enh->add_option("--config", enhance_args.config, "Enhancer key-value config");

  LtasArgs ltas_args;
  auto* c_ltas = app.add_subcommand("ltas", "Third-octave long-term average spectrum");
  c_ltas->add_option("--in", ltas_args.in)->required();
  c_ltas->add_option("--out", ltas_args.out, "CSV (default stdout)");
  AddCommon(c_ltas, ltas_args.common);

  MakeSsnArgs ssn_args;
  auto* c_ssn = app.add_subcommand("make-ssn", "Speech-shaped noise from a reference corpus");
  c_ssn->add_option("--ref", ssn_args.ref, "WAV file or directory")->required();
  c_ssn->add_option("--out", ssn_args.out)->required();
  c_ssn->add_option("--duration", ssn_args.duration_s, "Seconds");
  c_ssn->add_option("--lp-order", ssn_args.lp_order, "LPC order of the envelope");
  c_ssn->add_option("--rate", ssn_args.sample_rate, "Output sample rate");
  AddCommon(c_ssn, ssn_args.common);

  MixArgs mix_args;
  auto* c_mix = app.add_subcommand("mix", "Embed a target in a masker at an SNR");
  c_mix->add_option("--in", mix_args.in, "Target WAV")->required();
  c_mix->add_option("--masker", mix_args.masker, "Masker WAV, at least as long as the output")->required();
  c_mix->add_option("--snr", mix_args.snr_db, "Target SNR in dB")->required();
  c_mix->add_option("--out", mix_args.out)->required();
  c_mix->add_option("--lead", mix_args.lead_s, "Masker-only seconds before the target");
  c_mix->add_option("--lag", mix_args.lag_s, "Masker-only seconds after the target");
  c_mix->add_option("--target-level", mix_args.target_level_db, "Active level of the target, dB");
  c_mix->add_flag("--headroom", mix_args.headroom, "Scale the mixture down if it would clip");
  c_mix->add_option("--trial-id", mix_args.trial_id, "Key for the masker segment offset");
  AddCommon(c_mix, mix_args.common);

  GenStimuliArgs gen_args;
  auto* c_gen = app.add_subcommand("gen-stimuli", "Render a stimulus plan into WAVs and a manifest");
  c_gen->add_option("--plan", gen_args.plan, "Plan JSON (docs/manifest.md)")->required();
  c_gen->add_option("--out", gen_args.out, "Output directory")->required();
  AddCommon(c_gen, gen_args.common);

  ScoreArgs score_args;
  auto* c_score = app.add_subcommand("score", "WRR scoring, qualification and aggregation");
  c_score->add_option("--manifest", score_args.manifest, "Stimulus manifest")->required();
  c_score->add_option("--responses", score_args.responses, "JSONL responses or service log")->required();
  c_score->add_option("--group", score_args.group, "Comma-separated grouping keys");
  c_score->add_option("--out", score_args.out, "Report CSV (default stdout)");
  c_score->add_option("--listeners", score_args.listeners_out, "Per-listener qualification CSV");
  c_score->add_option("--resamples", score_args.resamples, "Bootstrap resamples")->check(CLI::Range(2, 1000000));
  AddCommon(c_score, score_args.common);

  ServeArgs serve_args;
  auto* c_serve = app.add_subcommand("serve", "Run the listening-test HTTP service");
  c_serve->add_option("--manifest", serve_args.manifest, "Stimulus manifest")->required();
  c_serve->add_option("--audio-dir", serve_args.audio_dir, "Default: manifest directory");
  c_serve->add_option("--log", serve_args.log, "Append-only JSONL log")->required();
  c_serve->add_option("--host", serve_args.host, "Bind address");
  c_serve->add_option("--port", serve_args.port, "0 picks a free port");
  c_serve->add_option("--trials", serve_args.trials, "Max test trials per session");
  c_serve->add_option("--references", serve_args.references, "Reference trials per session");
  c_serve->add_option("--ui-dir", serve_args.ui_dir, "Static files served at /");
  AddCommon(c_serve, serve_args.common);

  SynthCorpusArgs synth_args;
  auto* c_synth = app.add_subcommand("synth-corpus", "Synthetic desk speech from sentence lines");
  c_synth->add_option("--text", synth_args.text, "One sentence per line")->required();
  c_synth->add_option("--out", synth_args.out)->required();
  c_synth->add_option("--voice", synth_args.voice, "Synthetic voice, 1 or 2")->check(CLI::IsMember({1, 2}));
  c_synth->add_option("--effort-spread", synth_args.effort_spread, "Random per-sentence tilt spread");
  c_synth->add_option("--prefix", synth_args.prefix, "File name prefix");
  AddCommon(c_synth, synth_args.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "effortlab: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (c_tilt->parsed()) return AnalyzeTilt(tilt_args);
    if (c_fit->parsed()) return FitStats(fit_args);
    if (c_effort->parsed()) return ApplyEffortCmd(effort_args);
    if (c_enh->parsed()) return EnhanceCmd(enhance_args);
    if (c_ltas->parsed()) return LtasCmd(ltas_args);
    if (c_ssn->parsed()) return MakeSsn(ssn_args);
    if (c_mix->parsed()) return MixCmd(mix_args);
    if (c_gen->parsed()) return GenStimuli(gen_args);
    if (c_score->parsed()) return Score(score_args);
    if (c_serve->parsed()) return Serve(serve_args);
    if (c_synth->parsed()) return SynthCorpus(synth_args);
  } catch (const MissingInput& e) {
    std::cerr << "effortlab: " << e.what() << "\n";
    return kExitMissingInput;
  } catch (const Error& e) {
    std::cerr << "effortlab: " << ToString(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrorCode::kFormat ? kExitMalformed : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "effortlab: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

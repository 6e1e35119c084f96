#pragma once

#include <cstdio>

#include "effortlab/stimuli.hpp"
#include "effortlab/wav_io.hpp"
#include "support.hpp"

namespace testing_support {

// Manifest with `tests` test utterances (two conditions each) and `refs`
// clean reference utterances. Each trial gets a tiny WAV in audio_dir.
inline effortlab::stimuli::Manifest SyntheticManifest(const std::filesystem::path& audio_dir, int tests,
                                                      int refs) {
  using effortlab::stimuli::ManifestTrial;
  effortlab::stimuli::Manifest m;
  m.seed = 1;
  const auto lines = HarvardLines();
  std::filesystem::create_directories(audio_dir);
  auto add = [&](const std::string& utt, const std::string& system, const std::string& masker, double snr,
                 bool is_ref, const std::string& text) {
    ManifestTrial t;
    t.trial.utterance_id = utt;
    t.trial.system = system;
    t.trial.voice = "voice1";
    t.trial.masker = masker;
    t.trial.snr_db = snr;
    t.trial.is_reference = is_ref;
    t.trial.reference_text = text;
    t.trial.trial_id = effortlab::stimuli::MakeTrialId(1, utt, system, masker, std::to_string(snr));
    t.trial.path = t.trial.trial_id + ".wav";
    std::vector<double> x(160, 0.0);
    x[0] = static_cast<double>(m.trials.size() + 1) / 1024.0;
    effortlab::wav::Write(audio_dir / t.trial.path, Waveform(x, 16000));
    m.trials.push_back(t);
  };
  for (int i = 0; i < tests; ++i) {
    char id[8];
    std::snprintf(id, sizeof id, "u%02d", i);
    const std::string& text = lines[static_cast<std::size_t>(i) % lines.size()];
    add(id, "none", "ssn", -4.0, false, text);
    add(id, "ssdrc", "ssn", -4.0, false, text);
  }
  for (int i = 0; i < refs; ++i) {
    char id[8];
    std::snprintf(id, sizeof id, "r%02d", i);
    add(id, "none", "none", 0.0, true, lines[static_cast<std::size_t>(i) % lines.size()]);
  }
  return m;
}

}  // namespace testing_support

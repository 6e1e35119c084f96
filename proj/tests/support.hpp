#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "effortlab/synth.hpp"
#include "effortlab/waveform.hpp"

namespace testing_support {

using effortlab::Waveform;

inline Waveform Sine(double hz, double seconds, double amplitude = 0.1, int rate = 16000, double phase = 0.0) {
  std::vector<double> x(static_cast<std::size_t>(std::llround(seconds * rate)));
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate + phase);
  }
  return Waveform(std::move(x), rate);
}

inline Waveform WhiteNoise(double seconds, double sd, std::uint64_t seed, int rate = 16000) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  std::vector<double> x(static_cast<std::size_t>(std::llround(seconds * rate)));
  for (double& v : x) v = g(rng);
  return Waveform(std::move(x), rate);
}

// x[n] = pole * x[n-1] + e[n], started from the stationary distribution.
inline Waveform Ar1(double pole, double seconds, std::uint64_t seed, double sd = 0.01, int rate = 16000) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sd);
  std::vector<double> x(static_cast<std::size_t>(std::llround(seconds * rate)));
  double prev = g(rng) / std::sqrt(1.0 - pole * pole);
  for (double& v : x) {
    prev = pole * prev + g(rng);
    v = prev;
  }
  return Waveform(std::move(x), rate);
}

// Single-bin DFT power of x at frequency hz (Goertzel-free direct sum).
inline double ToneAmplitude(std::span<const double> x, double hz, int rate) {
  std::complex<double> acc;
  for (std::size_t n = 0; n < x.size(); ++n) {
    acc += x[n] * std::polar(1.0, -2.0 * std::numbers::pi * hz * static_cast<double>(n) / rate);
  }
  return 2.0 * std::abs(acc) / static_cast<double>(x.size());
}

inline double Db(double ratio) { return 20.0 * std::log10(ratio); }

inline double PlainRms(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

inline std::span<const double> Slice(const Waveform& w, std::size_t begin, std::size_t length) {
  return std::span<const double>(w.samples).subspan(begin, length);
}

inline std::filesystem::path DataDir() { return EFFORTLAB_TEST_DATA_DIR; }

inline std::vector<std::string> HarvardLines() {
  std::ifstream in(DataDir() / "harvard_sample.txt");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

// The 20-sentence desk corpus rendered by one of the two synthetic voices.
inline const std::vector<Waveform>& DeskCorpus(int voice = 1) {
  static const std::vector<Waveform> corpora[2] = {
      [] {
        const auto lines = HarvardLines();
        std::vector<std::string_view> v(lines.begin(), lines.end());
        return effortlab::synth::SynthesizeCorpus(v, effortlab::synth::Voice(1), 0.0, 0);
      }(),
      [] {
        const auto lines = HarvardLines();
        std::vector<std::string_view> v(lines.begin(), lines.end());
        return effortlab::synth::SynthesizeCorpus(v, effortlab::synth::Voice(2), 0.0, 100);
      }()};
  return corpora[voice == 2 ? 1 : 0];
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("effortlab_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support

#include <benchmark/benchmark.h>

#include "effortlab/enhance.hpp"
#include "effortlab/resample.hpp"
#include "effortlab/stft.hpp"
#include "effortlab/synth.hpp"
#include "effortlab/tilt.hpp"
#include "effortlab/transcript.hpp"

using namespace effortlab;

namespace {

// About three seconds of synthetic speech.
const Waveform& Speech() {
  static const Waveform w =
      synth::Synthesize("The birch canoe slid on the smooth planks. Glue the sheet to the dark blue background.",
                        synth::Voice(1), 0);
  return w;
}

void BM_StftRoundTrip(benchmark::State& state) {
  const signal::StftConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(signal::Istft(signal::Stft(Speech(), config)));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(Speech().size()));
}
BENCHMARK(BM_StftRoundTrip)->Unit(benchmark::kMillisecond);

void BM_Resample(benchmark::State& state) {
  const int rate = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(signal::Resample(Speech(), rate));
}
BENCHMARK(BM_Resample)->Arg(8000)->Arg(44100)->Arg(48000)->Unit(benchmark::kMillisecond);

void BM_UtteranceTilt(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(tilt::UtteranceTiltValue(Speech()));
}
BENCHMARK(BM_UtteranceTilt)->Unit(benchmark::kMillisecond);

void BM_Ssdrc(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(enhance::Ssdrc(Speech()));
}
BENCHMARK(BM_Ssdrc)->Unit(benchmark::kMillisecond);

void BM_Wrr(benchmark::State& state) {
  const std::string ref = "the small pup gnawed a hole in the sock while the boy slept on the rug";
  const std::string hyp = "a small pub gnawed the hole in his sock while boys slept on a rug";
  for (auto _ : state) benchmark::DoNotOptimize(eval::WordRecognitionRate(ref, hyp));
}
BENCHMARK(BM_Wrr);

}  // namespace

BENCHMARK_MAIN();

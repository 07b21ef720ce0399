#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "melotok/melody.h"
#include "melotok/metrics.h"
#include "melotok/quantize.h"
#include "melotok/rng.h"
#include "melotok/stream.h"

namespace melotok {
namespace {

FeatureMatrix RandomFeatures(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  SplitMix64 rng(seed);
  FeatureMatrix m(rows, dim);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t d = 0; d < dim; ++d) m.at(i, d) = static_cast<float>(rng.NextGaussian());
  }
  return m;
}

AudioClip Tone(double seconds) {
  AudioClip clip;
  clip.samples.resize(static_cast<std::size_t>(seconds * clip.sample_rate));
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    clip.samples[i] = 0.5 * std::sin(2.0 * std::numbers::pi * 220.0 * i / clip.sample_rate);
  }
  return clip;
}

void BM_TrainKMeans(benchmark::State& state) {
  const FeatureMatrix x = RandomFeatures(2000, 64, 1);
  KMeansOptions o;
  o.max_iters = 20;
  o.threads = static_cast<int>(state.range(1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(TrainKMeans(x, static_cast<std::size_t>(state.range(0)), o));
  }
}
BENCHMARK(BM_TrainKMeans)->Args({128, 1})->Args({128, 4})->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_Encode(benchmark::State& state) {
  const FeatureMatrix x = RandomFeatures(5000, 1024, 2);
  KMeansOptions o;
  o.max_iters = 2;
  const Codebook cb = TrainKMeans(RandomFeatures(1024, 1024, 3), 128, o);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Encode(cb, x, static_cast<int>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.rows()));
}
BENCHMARK(BM_Encode)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

Bundle MinuteBundle() {
  SplitMix64 rng(4);
  const std::size_t n = 3000;
  TokenSequence ids(n);
  for (auto& id : ids) id = static_cast<TokenId>(rng.NextBelow(128));
  Bundle b;
  b.tokens = MakeTokenStream({ids}, {128});
  MelodyTrack m;
  for (std::size_t i = 0; i < n; ++i) {
    m.voiced.push_back(i % 5 != 0);
    m.lf0.push_back(m.voiced.back() ? 5.5 : 0.0);
  }
  b.melody = m;
  return b;
}

void BM_Pack(benchmark::State& state) {
  const Bundle b = MinuteBundle();
  for (auto _ : state) benchmark::DoNotOptimize(Pack(b));
}
BENCHMARK(BM_Pack);

void BM_Unpack(benchmark::State& state) {
  const std::vector<unsigned char> bytes = Pack(MinuteBundle());
  for (auto _ : state) benchmark::DoNotOptimize(Unpack(bytes));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes.size()));
}
BENCHMARK(BM_Unpack);

void BM_EstimateF0(benchmark::State& state) {
  const AudioClip clip = Tone(10.0);
  F0Options o;
  o.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(EstimateF0(clip, o));
}
BENCHMARK(BM_EstimateF0)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_MelCepstrum(benchmark::State& state) {
  const AudioClip clip = Tone(10.0);
  for (auto _ : state) benchmark::DoNotOptimize(MelCepstrum(clip));
}
BENCHMARK(BM_MelCepstrum)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace melotok
BENCHMARK_MAIN();

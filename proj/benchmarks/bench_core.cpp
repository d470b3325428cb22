#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "envmorph/dtw.hpp"
#include "envmorph/engines.hpp"
#include "envmorph/extraction.hpp"
#include "envmorph/neural/models.hpp"
#include "envmorph/synthgen.hpp"

using namespace envmorph;

namespace {

MorphTuple tuple_for(const char* combo, std::uint64_t seed) {
  return sample_tuple(AxisFlags::parse(combo), 0.5, seed);
}

void BM_Extract(benchmark::State& state) {
  const auto rate = static_cast<std::uint32_t>(state.range(0));
  std::vector<double> x(static_cast<std::size_t>(rate) * 10);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double t = static_cast<double>(n) / rate;
    x[n] = (0.2 + 0.5 * std::sin(2.0 * t)) * std::sin(2.0 * std::numbers::pi * 440.0 * t);
  }
  const AudioClip clip(x, rate);
  for (auto _ : state) benchmark::DoNotOptimize(extract_envelope(clip));
}
BENCHMARK(BM_Extract)->Arg(16000)->Arg(44100)->Unit(benchmark::kMillisecond);

void BM_Dtw(benchmark::State& state) {
  const auto t = tuple_for("placement", 1);
  for (auto _ : state) benchmark::DoNotOptimize(dtw_path(t.a, t.b));
}
BENCHMARK(BM_Dtw)->Unit(benchmark::kMillisecond);

void BM_DtwMorph(benchmark::State& state) {
  const auto t = tuple_for("quantity", 2);
  for (auto _ : state) benchmark::DoNotOptimize(dtw_morph(t.a, t.b, 0.5));
}
BENCHMARK(BM_DtwMorph)->Unit(benchmark::kMillisecond);

void BM_AudioMix(benchmark::State& state) {
  const auto t = tuple_for("amplitude", 3);
  for (auto _ : state) benchmark::DoNotOptimize(audio_mix(t.a, t.b, 0.3));
}
BENCHMARK(BM_AudioMix);

void BM_SampleTuple(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(tuple_for("placement+quantity", seed++));
}
BENCHMARK(BM_SampleTuple)->Unit(benchmark::kMicrosecond);

void BM_EncodeBatch(benchmark::State& state) {
  const auto ae = Autoencoder::initialized(0);
  std::vector<Envelope> batch;
  for (int i = 0; i < state.range(0); ++i) batch.push_back(tuple_for("spacing", 10 + i).a);
  for (auto _ : state) benchmark::DoNotOptimize(encode_all(batch, ae));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EncodeBatch)->Arg(1)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_DecodeBatch(benchmark::State& state) {
  const auto ae = Autoencoder::initialized(0);
  std::vector<Envelope> batch;
  for (int i = 0; i < state.range(0); ++i) batch.push_back(tuple_for("spacing", 10 + i).a);
  const auto z = encode_all(batch, ae);
  for (auto _ : state) benchmark::DoNotOptimize(decode_all(z, ae));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DecodeBatch)->Arg(1)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_MapperForward(benchmark::State& state) {
  const auto mapper = Mapper::initialized(0);
  LatentVec a{}, b{};
  for (std::size_t i = 0; i < kLatentDim; ++i) a.values[i] = 0.01f * i, b.values[i] = -0.02f * i;
  for (auto _ : state) benchmark::DoNotOptimize(mapper_forward(a, b, 0.4, mapper));
}
BENCHMARK(BM_MapperForward)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

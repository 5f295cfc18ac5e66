// benchmarks/xvalign_bench.cc

// Copyright 2026 The xvalign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <random>

#include "xvalign/augment.h"
#include "xvalign/eval.h"
#include "xvalign/features.h"
#include "xvalign/losses.h"
#include "xvalign/model.h"

namespace xvalign {
namespace {

CorpusSpec BenchCorpus() {
  CorpusSpec c;
  c.n_speakers = 2;
  c.seed = 3;
  return c;
}

ModelSpec ToySpec() {
  ModelSpec s;
  s.frame_dims = {64, 64, 64, 64, 120};
  s.embedding_dim = 32;
  s.heads = 8;
  s.n_speakers = 20;
  return s;
}

void BM_SynthUtterance(benchmark::State& state) {
  const CorpusSpec spec = BenchCorpus();
  int utt = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(SynthUtterance(spec, 0, utt++ % 16));
  }
}
BENCHMARK(BM_SynthUtterance)->Unit(benchmark::kMillisecond);

void BM_Corrupt(benchmark::State& state) {
  const Waveform w =
      truncate(SynthUtterance(BenchCorpus(), 0, 0), 8.0, OffsetPolicy::kStart);
  AugmentSpec spec;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(corrupt(w, spec, seed++));
}
BENCHMARK(BM_Corrupt)->Unit(benchmark::kMillisecond);

void BM_Features(benchmark::State& state) {
  const Waveform w = truncate(SynthUtterance(BenchCorpus(), 0, 0),
                              static_cast<double>(state.range(0)),
                              OffsetPolicy::kStart);
  for (auto _ : state) benchmark::DoNotOptimize(ComputeFeatures(w));
}
BENCHMARK(BM_Features)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  ModelSpec spec = ToySpec();
  spec.pooling = state.range(0) ? PoolingMode::kAttentive : PoolingMode::kStats;
  NetworkParams p = NetworkParams::Init(spec, 1);
  const FeatureSequence f = ComputeFeatures(
      truncate(SynthUtterance(BenchCorpus(), 0, 0), 8.0, OffsetPolicy::kStart));
  for (auto _ : state) {
    p.ZeroGrad();
    const ForwardResult r = forward(f, p);
    nc::backward(am_softmax_from_cosines(r.cosines, 3, 0.2, 30.0));
  }
}
BENCHMARK(BM_ForwardBackward)
    ->ArgName("attentive")
    ->Arg(0)
    ->Arg(1)
    ->Unit(benchmark::kMillisecond);

void BM_ForwardFullSize(benchmark::State& state) {
  ModelSpec spec;
  spec.n_speakers = 20;
  const NetworkParams p = NetworkParams::Init(spec, 1);
  const FeatureSequence f = ComputeFeatures(
      truncate(SynthUtterance(BenchCorpus(), 0, 0), 2.0, OffsetPolicy::kStart));
  for (auto _ : state) benchmark::DoNotOptimize(ExtractEmbedding(f, p));
}
BENCHMARK(BM_ForwardFullSize)->Unit(benchmark::kMillisecond);

void BM_Eer(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> tgt(n / 10), non(n - n / 10);
  for (double& s : tgt) s = g(rng) + 2.0;
  for (double& s : non) s = g(rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eer(tgt, non));
    benchmark::DoNotOptimize(min_dcf(tgt, non));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Eer)->Arg(10000)->Arg(1000000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace xvalign

BENCHMARK_MAIN();

// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <benchmark/benchmark.h>

#include "tss/alignment.h"
#include "tss/rng.h"
#include "tss/stft.h"

namespace tss {
namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = 0.1 * rng.normal();
  return x;
}

void BM_StftAnalyze(benchmark::State& state) {
  const Stft stft;
  const auto x = noise(std::size_t(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(stft.analyze(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StftAnalyze)->Arg(16000)->Arg(64000);

void BM_StftRoundTrip(benchmark::State& state) {
  const Stft stft;
  const auto x = noise(std::size_t(state.range(0)), 2);
  for (auto _ : state) {
    const auto s = stft.analyze(x);
    benchmark::DoNotOptimize(stft.synthesize(s.mag, s.phase, x.size()));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StftRoundTrip)->Arg(16000);

void BM_GccPhat(benchmark::State& state) {
  const auto a = noise(std::size_t(state.range(0)), 3);
  const auto b = shift_signal(a, 80, a.size());
  for (auto _ : state) benchmark::DoNotOptimize(gcc_phat_delay(a, b));
}
BENCHMARK(BM_GccPhat)->Arg(32000)->Arg(160000);

}  // namespace
}  // namespace tss

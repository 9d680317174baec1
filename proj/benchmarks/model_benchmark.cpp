// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <benchmark/benchmark.h>

#include <cmath>

#include "tss/lstmformer.h"
#include "tss/metrics.h"
#include "tss/ops.h"
#include "tss/rng.h"

namespace tss {
namespace {

Tensor random(std::vector<std::size_t> shape, Rng& rng, double scale) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

void BM_LstmForward(benchmark::State& state) {
  Rng rng(1);
  const std::size_t h = std::size_t(state.range(0));
  const Tensor x = random({100, h}, rng, 1.0);
  Variable wx("wx", random({h, 4 * h}, rng, 0.05)), wh("wh", random({h, 4 * h}, rng, 0.05)),
      b("b", Tensor({4 * h}));
  for (auto _ : state) {
    Tape tape;
    LstmWeights w{tape.parameter(wx), tape.parameter(wh), tape.parameter(b)};
    benchmark::DoNotOptimize(lstm(tape, tape.constant(x), w));
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_LstmForward)->Arg(128)->Arg(256);

void BM_LstmForwardBackward(benchmark::State& state) {
  Rng rng(2);
  const std::size_t h = std::size_t(state.range(0));
  const Tensor x = random({100, h}, rng, 1.0);
  Variable wx("wx", random({h, 4 * h}, rng, 0.05)), wh("wh", random({h, 4 * h}, rng, 0.05)),
      b("b", Tensor({4 * h}));
  for (auto _ : state) {
    Tape tape;
    LstmWeights w{tape.parameter(wx), tape.parameter(wh), tape.parameter(b)};
    const Value y = lstm(tape, tape.constant(x), w);
    tape.reverse_pass(sum(tape, y));
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_LstmForwardBackward)->Arg(128)->Arg(256);

void BM_SeparateOneSecond(benchmark::State& state) {
  const auto variant = static_cast<Variant>(state.range(0));
  const ModelParams p = build_model(ModelConfig::preset(variant), 3);
  Rng rng(4);
  std::vector<double> a(16000), b(16000);
  for (double& v : a) v = 0.1 * rng.normal();
  for (double& v : b) v = 0.1 * rng.normal();
  const Waveform mix = Waveform::stereo(a, b);
  SpeakerEmbedding emb;
  emb.vector.assign(256, 1.0 / 16.0);
  for (auto _ : state) benchmark::DoNotOptimize(separate_utterance(mix, emb, p));
  state.SetLabel(variant_name(variant));
}
BENCHMARK(BM_SeparateOneSecond)
    ->Arg(int(Variant::kDual))
    ->Arg(int(Variant::kSingleEqual))
    ->Arg(int(Variant::kSingleHalf))
    ->Unit(benchmark::kMillisecond);

void BM_TrainStepOneSecond(benchmark::State& state) {
  ModelParams p = build_model(ModelConfig::preset(Variant::kDual), 5);
  const Stft stft(p.config.stft);
  Rng rng(6);
  std::vector<double> a(16000), b(16000), t(16000);
  for (double& v : a) v = 0.1 * rng.normal();
  for (double& v : b) v = 0.1 * rng.normal();
  for (double& v : t) v = 0.1 * rng.normal();
  const Waveform mix = Waveform::stereo(a, b);
  SpeakerEmbedding emb;
  emb.vector.assign(256, 1.0 / 16.0);
  for (auto _ : state) {
    Tape tape;
    const BoundModel m = bind(tape, p);
    const auto g = separation_forward(tape, m, stft, mix, emb);
    tape.reverse_pass(neg_si_snr(tape, g.waveform, t));
    p.zero_grad();
  }
}
BENCHMARK(BM_TrainStepOneSecond)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace tss

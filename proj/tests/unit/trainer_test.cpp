// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "test_support.h"
#include "tss/adam.h"
#include "tss/checkpoint.h"
#include "tss/errors.h"
#include "tss/speech_synth.h"
#include "tss/trainer.h"

namespace tss {
namespace {

using testing::TempDir;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Variable p("p", Tensor::vector({1.0, -2.0, 3.0}));
  Variable* params[] = {&p};
  AdamState state;
  adam_step(params, state, 1e-3);
  EXPECT_EQ(p.value, Tensor::vector({1.0, -2.0, 3.0}));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  const double lr = 1e-4;
  Variable p("p", Tensor::vector({0.0}));
  p.grad[0] = 1.0;
  Variable* params[] = {&p};
  AdamState state;
  adam_step(params, state, lr);
  EXPECT_LT(std::abs(p.value[0] + lr), 1e-8 * lr);
  EXPECT_EQ(p.grad[0], 0.0);
  EXPECT_EQ(state.step, 1u);
}

TEST(Adam, NonFiniteGradientNamesVariable) {
  Variable a("layer.a", Tensor::vector({1.0}));
  Variable b("layer.b", Tensor::vector({1.0}));
  a.grad[0] = 1.0;
  b.grad[0] = std::nan("");
  Variable* params[] = {&a, &b};
  AdamState state;
  try {
    adam_step(params, state, 1e-3);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("layer.b"), std::string::npos);
  }
  EXPECT_EQ(a.value[0], 1.0);
  EXPECT_EQ(state.step, 0u);
}

TEST(Adam, UpdatesOnlyVariablesWithGradient) {
  Variable a("a", Tensor::vector({1.0, 1.0}));
  Variable b("b", Tensor::vector({1.0}));
  a.grad[0] = 0.5;
  Variable* params[] = {&a, &b};
  AdamState state;
  adam_step(params, state, 1e-2);
  EXPECT_NE(a.value[0], 1.0);
  EXPECT_EQ(a.value[1], 1.0);
  EXPECT_EQ(b.value[0], 1.0);
}

TEST(Adam, DeterministicAcrossRuns) {
  const auto run = [] {
    Variable p("p", Tensor::vector({0.3, -0.7}));
    Variable* params[] = {&p};
    AdamState state;
    for (int i = 0; i < 20; ++i) {
      p.grad[0] = std::sin(p.value[0] * 3.0);
      p.grad[1] = p.value[1] * p.value[0];
      adam_step(params, state, 1e-2);
    }
    return p.value;
  };
  EXPECT_EQ(run(), run());
}

TEST(Checkpoint, RoundTripIsBitExact) {
  TempDir dir("ckpt");
  Checkpoint c;
  c.params = build_model(ModelConfig::micro(Variant::kDual, 9, 4, 4), 3);
  for (Variable* v : c.params.variables()) {
    c.adam.m[v->name] = v->value;
    c.adam.v[v->name] = v->value;
    for (double& x : c.adam.v[v->name].values()) x = x * x + 1e-300;
  }
  c.adam.step = 17;
  c.epoch = 4;
  c.step = 17;
  c.best_valid_si_snr = 3.25;
  c.epochs_without_improvement = 2;
  Rng rng(5);
  rng.normal();
  c.rng_state = rng.state();
  save_checkpoint(dir / "x.ckpt", c);
  const Checkpoint back = load_checkpoint(dir / "x.ckpt");
  EXPECT_EQ(back.params.config, c.params.config);
  const auto va = c.params.variables();
  const auto vb = back.params.variables();
  ASSERT_EQ(va.size(), vb.size());
  for (std::size_t i = 0; i < va.size(); ++i) EXPECT_EQ(va[i]->value, vb[i]->value);
  EXPECT_EQ(back.adam, c.adam);
  EXPECT_EQ(back.epoch, 4u);
  EXPECT_EQ(back.best_valid_si_snr, 3.25);
  EXPECT_EQ(back.epochs_without_improvement, 2u);
  EXPECT_EQ(back.rng_state, c.rng_state);
  save_checkpoint(dir / "y.ckpt", back);
  EXPECT_EQ(slurp(dir / "x.ckpt"), slurp(dir / "y.ckpt"));
}

TEST(Checkpoint, RejectsGarbage) {
  TempDir dir("ckpt_bad");
  {
    std::ofstream out(dir / "bad.ckpt");
    out << "definitely not a checkpoint";
  }
  EXPECT_THROW(load_checkpoint(dir / "bad.ckpt"), DataError);
  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), DataError);
}

TEST(TrainConfig, JsonDefaultsAndValidation) {
  const auto c = train_config_from_json("{\"train\": {\"learning_rate\": 0.001, \"patience\": 3}}");
  EXPECT_EQ(c.learning_rate, 0.001);
  EXPECT_EQ(c.patience, 3u);
  EXPECT_EQ(c.batch_size, 8u);
  EXPECT_EQ(train_config_from_json("{}").learning_rate, 1e-4);
  EXPECT_THROW(train_config_from_json("{\"train\": {\"patience\": 0}}"), ConfigError);
  EXPECT_THROW(train_config_from_json("{\"train\": {\"batch_size\": 0}}"), ConfigError);
}

class FitTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("fit");
    CorpusSpec corpus;
    corpus.speakers = 4;
    corpus.utterances_per_speaker = 2;
    corpus.min_seconds = 1.2;
    corpus.max_seconds = 1.4;
    write_synthetic_corpus(dir_->path() / "corpus", corpus);
    ManifestSpec spec;
    spec.train_scenes = 4;
    spec.valid_scenes = 2;
    spec.seed = 4;
    const auto summary = build_manifest(dir_->path() / "corpus", spec, dir_->path() / "scenes");
    for (const auto& r : summary.records) (r.split == "train" ? train_ : valid_).push_back(r);
  }
  static void TearDownTestSuite() {
    delete dir_;
    train_.clear();
    valid_.clear();
  }

  static ModelConfig micro() { return ModelConfig::micro(Variant::kDual, 257, 4, 256); }
  static TrainConfig quick(std::size_t epochs) {
    TrainConfig c;
    c.learning_rate = 1e-3;
    c.batch_size = 2;
    c.max_epochs = epochs;
    c.patience = 10;
    c.crop_seconds = 0.5;
    c.seed = 9;
    return c;
  }

  static TempDir* dir_;
  static std::vector<SceneRecord> train_;
  static std::vector<SceneRecord> valid_;
};

TempDir* FitTest::dir_ = nullptr;
std::vector<SceneRecord> FitTest::train_;
std::vector<SceneRecord> FitTest::valid_;

TEST_F(FitTest, PrepareSampleAlignsTruth) {
  Rng rng(1);
  SceneRecord r = train_[0];
  const Sample s = prepare_sample(r, Variant::kDual, kDefaultMaxLag, rng, SampleMode::kTrain);
  EXPECT_EQ(s.input.num_channels(), 2u);
  EXPECT_EQ(s.truth.size(), s.input.length());
  EXPECT_EQ(s.lag, -r.injected_delay);
  EXPECT_EQ(gcc_phat_delay(Waveform::mono(s.truth), s.input.take_channel(0)).lag, 0);
  EXPECT_EQ(s.embedding.dim(), kEmbeddingDim);
}

TEST_F(FitTest, PrepareSampleUsesCachedLag) {
  Rng rng(1);
  SceneRecord r = train_[1];
  const Sample measured = prepare_sample(r, Variant::kDual, kDefaultMaxLag, rng, SampleMode::kTrain);
  r.lag = measured.lag;
  const Sample cached = prepare_sample(r, Variant::kDual, kDefaultMaxLag, rng, SampleMode::kTrain);
  EXPECT_EQ(cached.truth, measured.truth);
}

TEST_F(FitTest, InjectedDelayEightyClosesToZero) {
  Rng rng(1);
  std::size_t checked = 0;
  for (const auto& r : train_) {
    const Sample s = prepare_sample(r, Variant::kDual, kDefaultMaxLag, rng, SampleMode::kTrain);
    EXPECT_EQ(gcc_phat_delay(Waveform::mono(s.truth), s.input.take_channel(0)).lag, 0) << r.id;
    ++checked;
  }
  EXPECT_EQ(checked, train_.size());
}

TEST_F(FitTest, SingleVariantChannelSelection) {
  Rng rng(2);
  std::set<std::size_t> seen;
  for (int i = 0; i < 12; ++i) {
    seen.insert(prepare_sample(train_[0], Variant::kSingleEqual, kDefaultMaxLag, rng,
                               SampleMode::kTrain).channel);
    EXPECT_EQ(prepare_sample(train_[0], Variant::kSingleEqual, kDefaultMaxLag, rng,
                             SampleMode::kEvaluate).channel,
              0u);
  }
  EXPECT_EQ(seen.size(), 2u);
}

TEST_F(FitTest, SingleTrainingTruthFollowsSecondChannel) {
  Rng rng(2);
  const Sample s =
      prepare_sample(train_[0], Variant::kSingleEqual, kDefaultMaxLag, rng, SampleMode::kTrain);
  ASSERT_EQ(s.truth_second.size(), s.input.length());
  EXPECT_EQ(gcc_phat_delay(Waveform::mono(s.truth_second), s.input.take_channel(1)).lag, 0);
  const Sample c = crop_sample(s, 8000, rng);
  EXPECT_EQ(c.truth_second.size(), 8000u);
  EXPECT_TRUE(prepare_sample(train_[0], Variant::kDual, kDefaultMaxLag, rng, SampleMode::kTrain)
                  .truth_second.empty());
}

TEST_F(FitTest, CropKeepsTruthAligned) {
  Rng rng(3);
  const Sample s = prepare_sample(train_[0], Variant::kDual, kDefaultMaxLag, rng, SampleMode::kEvaluate);
  const Sample c = crop_sample(s, 8000, rng);
  EXPECT_EQ(c.input.length(), 8000u);
  EXPECT_EQ(c.truth.size(), 8000u);
  const auto it = std::search(s.truth.begin(), s.truth.end(), c.truth.begin(), c.truth.end());
  ASSERT_NE(it, s.truth.end());
  const std::size_t offset = std::size_t(it - s.truth.begin());
  EXPECT_EQ(c.input.channel(1)[0], s.input.channel(1)[offset]);
}

TEST_F(FitTest, FrozenLearningRateStopsAfterTwoEpochs) {
  TempDir out("fit_frozen");
  TrainConfig c = quick(10);
  c.learning_rate = 0.0;
  c.patience = 1;
  FitOptions o;
  o.out_dir = out.path();
  const FitResult r = fit(train_, valid_, micro(), c, o);
  EXPECT_EQ(r.history.size(), 2u);
  EXPECT_TRUE(r.stopped_early);
  EXPECT_TRUE(std::filesystem::exists(r.best_checkpoint));
  std::ifstream log(out / "train_log.jsonl");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(log, line)) ++lines;
  EXPECT_EQ(lines, 2u);
}

TEST_F(FitTest, DeterministicAndResumable) {
  TempDir a("fit_a"), b("fit_b"), c("fit_c");
  FitOptions oa, ob, oc;
  oa.out_dir = a.path();
  ob.out_dir = b.path();
  oc.out_dir = c.path();
  const FitResult ra = fit(train_, valid_, micro(), quick(4), oa);
  const FitResult rb = fit(train_, valid_, micro(), quick(4), ob);
  ASSERT_EQ(ra.history.size(), rb.history.size());
  for (std::size_t i = 0; i < ra.history.size(); ++i) {
    EXPECT_EQ(ra.history[i].train_loss, rb.history[i].train_loss);
  }
  EXPECT_EQ(slurp(ra.best_checkpoint), slurp(rb.best_checkpoint));

  fit(train_, valid_, micro(), quick(2), oc);
  oc.resume = true;
  const FitResult rc = fit(train_, valid_, micro(), quick(4), oc);
  EXPECT_EQ(slurp(ra.last_checkpoint), slurp(rc.last_checkpoint));
  EXPECT_EQ(slurp(ra.best_checkpoint), slurp(rc.best_checkpoint));
  const std::string recipe = load_checkpoint(rc.best_checkpoint).train_config;
  EXPECT_NE(recipe.find("learning_rate"), std::string::npos) << recipe;
  EXPECT_EQ(recipe.find("max_epochs"), std::string::npos) << recipe;
}

TEST_F(FitTest, BestCheckpointHoldsBestValidation) {
  TempDir out("fit_best");
  FitOptions o;
  o.out_dir = out.path();
  const FitResult r = fit(train_, valid_, micro(), quick(3), o);
  double best = -1e9;
  for (const auto& e : r.history) best = std::max(best, e.valid_si_snr);
  const Checkpoint ck = load_checkpoint(r.best_checkpoint);
  EXPECT_EQ(ck.best_valid_si_snr, best);
  std::vector<Sample> valid;
  Rng rng(0);
  for (const auto& rec : valid_) {
    valid.push_back(prepare_sample(rec, Variant::kDual, kDefaultMaxLag, rng, SampleMode::kEvaluate));
  }
  EXPECT_EQ(mean_si_snr(ck.params, valid), best);
}

TEST_F(FitTest, EmptyManifestsAreErrors) {
  TempDir out("fit_empty");
  FitOptions o;
  o.out_dir = out.path();
  EXPECT_THROW(fit({}, valid_, micro(), quick(1), o), DataError);
  EXPECT_THROW(fit(train_, {}, micro(), quick(1), o), DataError);
}

TEST_F(FitTest, MissingAudioIsSkippedAndCounted) {
  TempDir out("fit_skip");
  auto train = train_;
  SceneRecord broken = train_[0];
  broken.id = "broken";
  broken.mixture = out / "missing.wav";
  train.push_back(broken);
  FitOptions o;
  o.out_dir = out.path();
  const FitResult r = fit(train, valid_, micro(), quick(1), o);
  EXPECT_EQ(r.skipped_samples, 1u);
}

}  // namespace
}  // namespace tss

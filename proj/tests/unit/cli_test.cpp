// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cli.h"
#include "test_support.h"
#include "tss/checkpoint.h"
#include "tss/embedding.h"
#include "tss/lstmformer.h"
#include "tss/manifest.h"
#include "tss/speech_synth.h"
#include "tss/stft.h"
#include "tss/wav.h"

namespace tss {
namespace {

using testing::TempDir;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome tss_run(std::vector<std::string> args) {
  args.insert(args.begin(), "tss");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config(const char* name) { return std::string(TSS_CONFIG_DIR) + "/" + name; }

TEST(Cli, HelpDocumentsExitCodes) {
  const auto r = tss_run({"--help"});
  EXPECT_EQ(r.code, cli::kExitOk);
  EXPECT_NE(r.out.find("Exit codes"), std::string::npos);
  EXPECT_NE(r.out.find("simulate"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(tss_run({}).code, cli::kExitUsage);
  EXPECT_EQ(tss_run({"bogus"}).code, cli::kExitUsage);
  const auto r = tss_run({"inspect", "--config", config("dual.json"), "--nope"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("--nope"), std::string::npos);
  EXPECT_EQ(tss_run({"separate", "--checkpoint", "x"}).code, cli::kExitUsage);
}

TEST(Cli, DataErrorsCarryPaths) {
  const auto r = tss_run({"inspect", "--config", "/no/such/config.json"});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("/no/such/config.json"), std::string::npos);
}

TEST(Cli, InspectMatchesAccounting) {
  for (const char* name : {"dual.json", "single_half.json", "single_equal.json"}) {
    const ModelConfig cfg = load_model_config(config(name));
    const auto r = tss_run({"inspect", "--config", config(name), "--json"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
    EXPECT_NE(r.out.find("\"params\":" + std::to_string(count_params(build_model(cfg, 0)))),
              std::string::npos)
        << r.out;
    EXPECT_NE(r.out.find("\"macs\":" + std::to_string(count_macs(cfg))), std::string::npos)
        << r.out;
  }
  const auto table = tss_run({"inspect", "--config", config("dual.json")});
  EXPECT_NE(table.out.find("Params"), std::string::npos);
  EXPECT_NE(table.out.find("MACs"), std::string::npos);
}

TEST(Cli, SeparateWithPassThroughMask) {
  TempDir dir("cli_sep");
  Checkpoint ck;
  ck.params = build_model(ModelConfig::micro(Variant::kDual, 257, 4, 256), 2);
  ck.params.mask_compress->w.value.fill(0.0);
  ck.params.mask_compress->b.value.fill(50.0);  // sigmoid(50) == 1 in double
  save_checkpoint(dir / "pass.ckpt", ck);
  const auto mix = Waveform::stereo(testing::speech_like_noise(16000, 1),
                                    testing::speech_like_noise(16000, 2));
  write_wav(dir / "mix.wav", mix);
  write_wav(dir / "ref.wav", Waveform::mono(testing::speech_like_noise(24000, 3)));
  const auto r = tss_run({"separate", "--checkpoint", (dir / "pass.ckpt").string(), "--mix",
                          (dir / "mix.wav").string(), "--ref", (dir / "ref.wav").string(), "--out",
                          (dir / "est.wav").string()});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  const Waveform est = read_wav(dir / "est.wav");
  const Stft stft;
  const auto spec = stft.analyze(mix.channel(0));
  const auto recon = stft.synthesize(spec.mag, spec.phase, mix.length());
  ASSERT_EQ(est.length(), mix.length());
  double worst = 0.0;
  for (std::size_t n = 0; n < recon.size(); ++n) {
    worst = std::max(worst, std::abs(est.channel(0)[n] - recon[n]));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Cli, SeparateRejectsMonoMixForDual) {
  TempDir dir("cli_mono");
  Checkpoint ck;
  ck.params = build_model(ModelConfig::micro(Variant::kDual, 257, 4, 256), 2);
  save_checkpoint(dir / "m.ckpt", ck);
  write_wav(dir / "mix.wav", Waveform::mono(testing::speech_like_noise(16000, 1)));
  write_wav(dir / "ref.wav", Waveform::mono(testing::speech_like_noise(24000, 3)));
  const auto r = tss_run({"separate", "--checkpoint", (dir / "m.ckpt").string(), "--mix",
                          (dir / "mix.wav").string(), "--ref", (dir / "ref.wav").string(), "--out",
                          (dir / "est.wav").string()});
  EXPECT_EQ(r.code, cli::kExitData);
  EXPECT_NE(r.err.find("mix.wav"), std::string::npos);
}

class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("cli_pipeline");
    ASSERT_EQ(tss_run({"synth-corpus", "--out", corpus(), "--speakers", "6", "--utterances", "3",
                       "--min-seconds", "1.2", "--max-seconds", "1.6", "--seed", "5"})
                  .code,
              cli::kExitOk);
  }
  static void TearDownTestSuite() { delete dir_; }
  static std::string corpus() { return (dir_->path() / "corpus").string(); }
  static std::string path(const std::string& rel) { return (dir_->path() / rel).string(); }

  static TempDir* dir_;
};

TempDir* PipelineTest::dir_ = nullptr;

TEST_F(PipelineTest, SimulateIsIdempotent) {
  for (const char* out : {"sim_a", "sim_b"}) {
    const auto r = tss_run({"simulate", "--corpus", corpus(), "--out", path(out), "--scenes", "6",
                            "--valid-scenes", "2", "--test-scenes", "2", "--seed", "3"});
    ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  }
  for (const char* f : {"manifest.jsonl", "train.jsonl", "valid.jsonl", "test.jsonl"}) {
    EXPECT_EQ(slurp(path("sim_a") + "/" + f), slurp(path("sim_b") + "/" + f)) << f;
  }
  for (const auto& r : read_manifest(path("sim_a") + "/manifest.jsonl")) {
    const auto other = dir_->path() / "sim_b" / "mix" / r.mixture.filename();
    EXPECT_EQ(slurp(r.mixture), slurp(other)) << r.id;
  }
}

TEST_F(PipelineTest, AlignReportsInjectedDelay) {
  ASSERT_EQ(tss_run({"simulate", "--corpus", corpus(), "--out", path("sim_align"), "--scenes", "4",
                     "--seed", "8", "--noise-floor-db", "-200"})
                .code,
            cli::kExitOk);
  const auto r = tss_run({"align", "--manifest", path("sim_align/train.jsonl"), "--report",
                          path("sim_align/lags.jsonl")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  std::ifstream in(path("sim_align/lags.jsonl"));
  std::string line;
  std::size_t n = 0;
  const auto records = read_manifest(path("sim_align/train.jsonl"));
  while (std::getline(in, line)) {
    const auto& rec = records.at(n++);
    EXPECT_NE(line.find("\"id\":\"" + rec.id + "\""), std::string::npos);
    EXPECT_NE(line.find("\"lag\":" + std::to_string(-rec.injected_delay) + ","), std::string::npos)
        << line;
  }
  EXPECT_EQ(n, records.size());
}

TEST_F(PipelineTest, EmbedFillsCache) {
  ASSERT_EQ(tss_run({"simulate", "--corpus", corpus(), "--out", path("sim_embed"), "--scenes", "4",
                     "--seed", "9"})
                .code,
            cli::kExitOk);
  const auto r = tss_run({"embed", "--manifest", path("sim_embed/train.jsonl"), "--cache",
                          path("sim_embed/cache")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_TRUE(std::filesystem::exists(path("sim_embed/cache/index.json")));
  EmbeddingCache cache(path("sim_embed/cache"));
  cache.load();
  EXPECT_GT(cache.size(), 0u);
  const auto again = tss_run({"embed", "--manifest", path("sim_embed/train.jsonl"), "--cache",
                              path("sim_embed/cache")});
  EXPECT_NE(again.out.find("(0 new)"), std::string::npos) << again.out;
}

TEST_F(PipelineTest, TrainEvaluateSmoke) {
  ASSERT_EQ(tss_run({"simulate", "--corpus", corpus(), "--out", path("sim_e2e"), "--scenes", "60",
                     "--valid-scenes", "4", "--test-scenes", "8", "--seed", "11"})
                .code,
            cli::kExitOk);
  {
    std::ofstream cfg(path("micro.json"));
    cfg << R"({"variant": "dual", "compress_dim": 32, "fc1_dim": 32, "lstm_hidden": 32,
               "fc2_dim": 32, "fc4_dim": 32,
               "train": {"learning_rate": 0.003, "batch_size": 4, "max_epochs": 6,
                         "patience": 6, "crop_seconds": 1.0, "seed": 2}})";
  }
  const auto t = tss_run({"train", "--manifest", path("sim_e2e/train.jsonl"), "--valid",
                          path("sim_e2e/valid.jsonl"), "--config", path("micro.json"), "--out",
                          path("run"), "--cache", path("cache")});
  ASSERT_EQ(t.code, cli::kExitOk) << t.err;
  EXPECT_TRUE(std::filesystem::exists(path("run/best.ckpt")));
  EXPECT_TRUE(std::filesystem::exists(path("run/train_log.jsonl")));
  const auto e = tss_run({"evaluate", "--checkpoint", path("run/best.ckpt"), "--manifest",
                          path("sim_e2e/test.jsonl"), "--report", path("eval.jsonl"), "--cache",
                          path("cache")});
  ASSERT_EQ(e.code, cli::kExitOk) << e.err;
  EXPECT_NE(e.out.find("Improved"), std::string::npos);
  std::ifstream in(path("eval.jsonl"));
  std::string line, last;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    last = line;
    ++rows;
  }
  EXPECT_EQ(rows, 9u);
  const auto agg = nlohmann::json::parse(last);
  EXPECT_TRUE(agg.at("aggregate").get<bool>());
  EXPECT_GT(agg.at("improved").get<double>(), 0.0) << last;
}

}  // namespace
}  // namespace tss

// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tss/alignment.h"
#include "tss/checkpoint.h"
#include "tss/embedding.h"
#include "tss/manifest.h"
#include "tss/metrics.h"
#include "tss/rng.h"

namespace tss {

struct TrainConfig {
  double learning_rate = 1e-4;
  std::size_t batch_size = 8;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  std::size_t max_steps = 0;  // 0: no step limit
  std::uint64_t seed = 1;
  double crop_seconds = 4.0;
  std::size_t max_lag = kDefaultMaxLag;
  SiSnrOptions loss;
  bool verbose = false;

  void validate() const;
};

std::string to_json(const TrainConfig& cfg);
// Reads the optional "train" object of a config file; absent keys keep defaults.
TrainConfig train_config_from_json(const std::string& text);

struct Sample {
  std::string id;
  Waveform input;              // full mixture; 2 channels for the dual variant
  std::vector<double> truth;   // truth channel 1 aligned to mixture channel 1
  // Truth channel 2 aligned to mixture channel 2; only kept for
  // single-channel training, where either channel may be the input.
  std::vector<double> truth_second;
  SpeakerEmbedding embedding;
  std::size_t channel = 0;     // reference channel for single-channel variants
  long lag = 0;
  bool saturated = false;
};

enum class SampleMode { kTrain, kEvaluate };

// Loads, aligns and embeds one scene. Training picks a random channel for
// single-channel variants; evaluation always uses channel 1.
Sample prepare_sample(const SceneRecord& record, Variant variant, std::size_t max_lag, Rng& rng,
                      SampleMode mode, EmbeddingCache* cache = nullptr);

// Random fixed-length crop of input and truth, drawn from `rng`.
Sample crop_sample(const Sample& sample, std::size_t length, Rng& rng);

struct EpochLog {
  std::size_t epoch = 0;
  std::uint64_t step = 0;
  double train_loss = 0.0;
  double valid_si_snr = 0.0;
  double wall_seconds = 0.0;
  bool improved = false;
};

struct FitResult {
  std::filesystem::path best_checkpoint;
  std::filesystem::path last_checkpoint;
  std::vector<EpochLog> history;
  std::size_t skipped_samples = 0;
  std::size_t saturated_alignments = 0;
  double best_valid_si_snr = 0.0;
  bool stopped_early = false;
};

struct FitOptions {
  std::filesystem::path out_dir;
  bool resume = false;  // continue from out_dir/last.ckpt when present
  EmbeddingCache* cache = nullptr;
  std::function<void(const EpochLog&)> on_epoch;
};

// Adam training with validation-driven early stopping. Writes last.ckpt,
// best.ckpt and train_log.jsonl into out_dir.
FitResult fit(const std::vector<SceneRecord>& train, const std::vector<SceneRecord>& valid,
              const ModelConfig& model_config, const TrainConfig& config,
              const FitOptions& options);

// Mean clamped SI-SNR of a model over prepared evaluation samples.
double mean_si_snr(const ModelParams& params, const std::vector<Sample>& samples);

}  // namespace tss

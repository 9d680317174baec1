// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tss/trainer.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "tss/errors.h"
#include "tss/wav.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tss {
namespace {

std::vector<double> to_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

double finite_or(double v, double fallback) { return std::isfinite(v) ? v : fallback; }

void append_log(const fs::path& path, const EpochLog& e) {
  json j = {{"epoch", e.epoch},
            {"step", e.step},
            {"train_loss", e.train_loss},
            {"valid_si_snr", e.valid_si_snr},
            {"wall_seconds", e.wall_seconds},
            {"improved", e.improved}};
  std::ofstream out(path, std::ios::app);
  out << j.dump() << '\n';
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be finite and non-negative");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (patience < 1) throw ConfigError("patience must be at least 1");
  if (max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (!(crop_seconds > 0.0)) throw ConfigError("crop_seconds must be positive");
}

std::string to_json(const TrainConfig& c) {
  json j = {{"learning_rate", c.learning_rate},
            {"batch_size", c.batch_size},
            {"max_epochs", c.max_epochs},
            {"patience", c.patience},
            {"max_steps", c.max_steps},
            {"seed", c.seed},
            {"crop_seconds", c.crop_seconds},
            {"max_lag", c.max_lag},
            {"literal_residual", c.loss.literal_residual}};
  return j.dump();
}

TrainConfig train_config_from_json(const std::string& text) {
  TrainConfig c;
  try {
    const json root = json::parse(text);
    const json j = root.contains("train") ? root["train"] : json::object();
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.seed = j.value("seed", c.seed);
    c.crop_seconds = j.value("crop_seconds", c.crop_seconds);
    c.max_lag = j.value("max_lag", c.max_lag);
    c.loss.literal_residual = j.value("literal_residual", c.loss.literal_residual);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid train config: ") + e.what());
  }
  c.validate();
  return c;
}

Sample prepare_sample(const SceneRecord& record, Variant variant, std::size_t max_lag, Rng& rng,
                      SampleMode mode, EmbeddingCache* cache) {
  Sample s;
  s.id = record.id;
  s.input = read_wav(record.mixture);
  const Waveform truth = read_wav(record.truth);
  if (s.input.num_channels() != 2) {
    throw DataError(record.mixture.string() + ": mixture must have 2 channels");
  }
  if (truth.num_channels() != 1 && truth.num_channels() != 2) {
    throw DataError(record.truth.string() + ": truth must have 1 or 2 channels");
  }
  const Waveform first = truth.take_channel(0);
  if (record.lag) {
    s.lag = *record.lag;
    s.truth = to_vector(apply_alignment(first, s.lag, s.input.length()).channel(0));
  } else {
    AlignResult a = align_pair(first, s.input.take_channel(0), max_lag);
    s.lag = a.lag;
    s.saturated = a.saturated;
    s.truth = to_vector(a.aligned.channel(0));
  }
  s.embedding = embedding_for_file(record.reference, cache);
  if (variant != Variant::kDual && mode == SampleMode::kTrain) {
    // Mono truth files only carry the mic 1 image; reuse it for channel 2.
    const Waveform second = truth.take_channel(truth.num_channels() - 1);
    s.truth_second =
        to_vector(align_pair(second, s.input.take_channel(1), max_lag).aligned.channel(0));
    s.channel = rng.index(2);
  }
  return s;
}

Sample crop_sample(const Sample& sample, std::size_t length, Rng& rng) {
  const std::size_t total = sample.input.length();
  if (total <= length) return sample;
  const std::size_t offset = rng.index(total - length + 1);
  Sample out = sample;
  std::vector<std::vector<double>> channels;
  for (std::size_t c = 0; c < sample.input.num_channels(); ++c) {
    auto ch = sample.input.channel(c).subspan(offset, length);
    channels.emplace_back(ch.begin(), ch.end());
  }
  out.input = Waveform(std::move(channels));
  out.truth.assign(sample.truth.begin() + long(offset), sample.truth.begin() + long(offset + length));
  if (!sample.truth_second.empty()) {
    out.truth_second.assign(sample.truth_second.begin() + long(offset),
                            sample.truth_second.begin() + long(offset + length));
  }
  return out;
}

double mean_si_snr(const ModelParams& params, const std::vector<Sample>& samples) {
  if (samples.empty()) throw PreconditionError("no samples to score");
  double total = 0.0;
  for (const Sample& s : samples) {
    const Waveform est = separate_utterance(s.input, s.embedding, params, s.channel);
    total += si_snr(est.channel(0), s.truth);
  }
  return total / double(samples.size());
}

FitResult fit(const std::vector<SceneRecord>& train, const std::vector<SceneRecord>& valid,
              const ModelConfig& model_config, const TrainConfig& config,
              const FitOptions& options) {
  config.validate();
  model_config.validate();
  if (train.empty()) throw DataError("training manifest is empty");
  if (valid.empty()) throw DataError("validation manifest is empty");
  if (options.out_dir.empty()) throw PreconditionError("fit needs an output directory");
  fs::create_directories(options.out_dir);

  FitResult result;
  result.best_checkpoint = options.out_dir / "best.ckpt";
  result.last_checkpoint = options.out_dir / "last.ckpt";
  const fs::path log_path = options.out_dir / "train_log.jsonl";

  Rng unused(0);
  const auto load_all = [&](const std::vector<SceneRecord>& records, SampleMode mode) {
    std::vector<Sample> out;
    for (const SceneRecord& r : records) {
      try {
        out.push_back(
            prepare_sample(r, model_config.variant, config.max_lag, unused, mode, options.cache));
        if (out.back().saturated) ++result.saturated_alignments;
      } catch (const DataError& e) {
        ++result.skipped_samples;
        std::cerr << "warning: skipping scene " << r.id << ": " << e.what() << "\n";
      }
    }
    return out;
  };
  const std::vector<Sample> train_samples = load_all(train, SampleMode::kTrain);
  const std::vector<Sample> valid_samples = load_all(valid, SampleMode::kEvaluate);
  if (train_samples.empty()) throw DataError("no readable training scenes");
  if (valid_samples.empty()) throw DataError("no readable validation scenes");

  Checkpoint state;
  Rng rng(derive_seed(config.seed, 2));
  if (options.resume && fs::exists(result.last_checkpoint)) {
    state = load_checkpoint(result.last_checkpoint);
    if (!(state.params.config == model_config)) {
      throw ConfigError(result.last_checkpoint.string() + " was trained with another model config");
    }
    rng.set_state(state.rng_state);
  } else {
    state.params = build_model(model_config, derive_seed(config.seed, 1));
    if (fs::exists(log_path)) fs::remove(log_path);
  }
  // Recipe only; the stop limits may grow across a resume.
  json recipe = json::parse(to_json(config));
  for (const char* key : {"max_epochs", "max_steps", "patience"}) recipe.erase(key);
  state.train_config = recipe.dump();
  result.best_valid_si_snr = finite_or(state.best_valid_si_snr, 0.0);

  const Stft stft(model_config.stft);
  const std::size_t crop = std::size_t(std::llround(config.crop_seconds * kSampleRate));
  const auto started = std::chrono::steady_clock::now();
  bool step_limit = config.max_steps > 0 && state.step >= config.max_steps;

  result.stopped_early = state.epochs_without_improvement >= config.patience;
  while (state.epoch < config.max_epochs && !step_limit && !result.stopped_early) {
    std::vector<std::size_t> order(train_samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      Tape tape;
      const BoundModel model = bind(tape, state.params);
      std::vector<Value> estimates;
      std::vector<std::vector<double>> references;
      for (std::size_t k = start; k < end; ++k) {
        Sample s = crop_sample(train_samples[order[k]], crop, rng);
        if (!model_config.dual()) s.channel = rng.index(s.input.num_channels());
        estimates.push_back(
            separation_forward(tape, model, stft, s.input, s.embedding, s.channel).waveform);
        references.push_back(s.channel == 1 && !s.truth_second.empty() ? std::move(s.truth_second)
                                                                       : std::move(s.truth));
      }
      const Value loss = si_snr_loss(tape, estimates, references, config.loss);
      const double loss_value = tape.value(loss)[0];
      if (!std::isfinite(loss_value)) {
        throw NumericalError("training diverged at step " + std::to_string(state.step + 1) +
                             " (loss " + std::to_string(loss_value) +
                             "); last good checkpoint: " + result.last_checkpoint.string());
      }
      tape.reverse_pass(loss);
      auto vars = state.params.variables();
      try {
        adam_step(vars, state.adam, config.learning_rate);
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + " at step " +
                             std::to_string(state.step + 1) + "; last good checkpoint: " +
                             result.last_checkpoint.string());
      }
      ++state.step;
      loss_sum += loss_value;
      ++batches;
      if (config.verbose) {
        std::cerr << "epoch " << state.epoch + 1 << " step " << state.step << " loss "
                  << loss_value << "\n";
      }
      if (config.max_steps > 0 && state.step >= config.max_steps) {
        step_limit = true;
        break;
      }
    }
    ++state.epoch;

    EpochLog log;
    log.epoch = state.epoch;
    log.step = state.step;
    log.train_loss = loss_sum / double(std::max<std::size_t>(batches, 1));
    log.valid_si_snr = mean_si_snr(state.params, valid_samples);
    log.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    log.improved = log.valid_si_snr > state.best_valid_si_snr;
    if (log.improved) {
      state.best_valid_si_snr = log.valid_si_snr;
      state.epochs_without_improvement = 0;
    } else {
      ++state.epochs_without_improvement;
    }
    state.rng_state = rng.state();
    if (log.improved) save_checkpoint(result.best_checkpoint, state);
    save_checkpoint(result.last_checkpoint, state);
    append_log(log_path, log);
    result.history.push_back(log);
    if (options.on_epoch) options.on_epoch(log);
    if (state.epochs_without_improvement >= config.patience) {
      result.stopped_early = true;
      break;
    }
  }
  result.best_valid_si_snr = state.best_valid_si_snr;
  return result;
}

}  // namespace tss

// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "cli.h"

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "tss/alignment.h"
#include "tss/checkpoint.h"
#include "tss/embedding.h"
#include "tss/errors.h"
#include "tss/lstmformer.h"
#include "tss/manifest.h"
#include "tss/metrics.h"
#include "tss/speech_synth.h"
#include "tss/trainer.h"
#include "tss/wav.h"

namespace tss::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kExitCodes =
    "Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.";

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

// id -> lag from an `align` report.
std::map<std::string, long> read_lag_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lag report " + path.string());
  std::map<std::string, long> lags;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      lags[j.at("id").get<std::string>()] = j.at("lag").get<long>();
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return lags;
}

void apply_lags(std::vector<SceneRecord>& records, const std::string& report) {
  if (report.empty()) return;
  const auto lags = read_lag_report(report);
  for (auto& r : records) {
    const auto it = lags.find(r.id);
    if (it != lags.end()) r.lag = it->second;
  }
}

struct Context {
  std::ostream& out;
  std::ostream& err;
};

struct SynthArgs {
  std::string out;
  CorpusSpec spec;
};

void add_synth(CLI::App& app, SynthArgs& a) {
  auto* c = app.add_subcommand("synth-corpus", "Write a seeded synthetic multi-speaker corpus");
  c->add_option("--out", a.out, "Corpus directory (one sub-directory per speaker)")->required();
  c->add_option("--speakers", a.spec.speakers, "Number of speakers")->capture_default_str();
  c->add_option("--utterances", a.spec.utterances_per_speaker, "Utterances per speaker")
      ->capture_default_str();
  c->add_option("--min-seconds", a.spec.min_seconds, "Shortest utterance")->capture_default_str();
  c->add_option("--max-seconds", a.spec.max_seconds, "Longest utterance")->capture_default_str();
  c->add_option("--seed", a.spec.seed, "Random seed")->capture_default_str();
}

int run_synth(const SynthArgs& a, Context& ctx) {
  write_synthetic_corpus(a.out, a.spec);
  ctx.out << "wrote " << a.spec.speakers * a.spec.utterances_per_speaker << " utterances of "
          << a.spec.speakers << " speakers to " << a.out << "\n";
  return kExitOk;
}

struct SimulateArgs {
  std::string corpus;
  std::string out;
  ManifestSpec spec;
};

void add_simulate(CLI::App& app, SimulateArgs& a) {
  auto* c = app.add_subcommand("simulate", "Render two-microphone scenes and write manifests");
  c->add_option("--corpus", a.corpus, "Corpus directory (one sub-directory per speaker)")
      ->required();
  c->add_option("--out", a.out, "Output directory for audio and manifests")->required();
  c->add_option("--scenes", a.spec.train_scenes, "Training scenes")->required();
  c->add_option("--valid-scenes", a.spec.valid_scenes, "Validation scenes")->capture_default_str();
  c->add_option("--test-scenes", a.spec.test_scenes, "Test scenes")->capture_default_str();
  c->add_option("--seed", a.spec.seed, "Random seed")->capture_default_str();
  c->add_option("--sir-min", a.spec.sir_min_db, "Lowest SIR in dB")->capture_default_str();
  c->add_option("--sir-max", a.spec.sir_max_db, "Highest SIR in dB")->capture_default_str();
  c->add_option("--max-delay", a.spec.max_injected_delay, "Largest injected truth delay (samples)")
      ->capture_default_str();
  c->add_option("--t60-min", a.spec.t60_min, "Shortest T60 in seconds")->capture_default_str();
  c->add_option("--t60-max", a.spec.t60_max, "Longest T60 in seconds")->capture_default_str();
  c->add_option("--noise-floor-db", a.spec.noise_floor_db, "Sensor noise level in dBFS")
      ->capture_default_str();
  c->add_option("--jitter", a.spec.geometry_jitter, "Source position jitter in metres")
      ->capture_default_str();
}

int run_simulate(const SimulateArgs& a, Context& ctx) {
  if (a.spec.sir_min_db > a.spec.sir_max_db || a.spec.t60_min > a.spec.t60_max) {
    throw ConfigError("simulate: ranges must satisfy min <= max");
  }
  const ManifestSummary s = build_manifest(a.corpus, a.spec, a.out);
  std::map<std::string, std::size_t> per_split;
  for (const auto& r : s.records) ++per_split[r.split];
  ctx.out << "wrote " << s.records.size() << " scenes (train " << per_split["train"] << ", valid "
          << per_split["valid"] << ", test " << per_split["test"] << ") to "
          << s.manifest_path.string() << "\n";
  if (!s.skipped_files.empty()) {
    ctx.err << "skipped " << s.skipped_files.size() << " unreadable files\n";
  }
  return kExitOk;
}

struct AlignArgs {
  std::string manifest;
  std::string report;
  std::size_t max_lag = kDefaultMaxLag;
};

void add_align(CLI::App& app, AlignArgs& a) {
  auto* c = app.add_subcommand("align", "Measure the truth-vs-mixture delay of every scene");
  c->add_option("--manifest", a.manifest, "Scene manifest (JSONL)")->required();
  c->add_option("--report", a.report, "Per-scene lag report (JSONL)")->required();
  c->add_option("--max-lag", a.max_lag, "Search range in samples")->capture_default_str();
}

int run_align(const AlignArgs& a, Context& ctx) {
  const auto records = read_manifest(a.manifest);
  std::ofstream out = open_out(a.report);
  std::size_t saturated = 0;
  for (const auto& r : records) {
    const Waveform mix = read_wav(r.mixture);
    const Waveform truth = read_wav(r.truth);
    if (mix.num_channels() != 2) throw DataError(r.mixture.string() + ": expected 2 channels");
    const AlignResult res = align_pair(truth.take_channel(0), mix.take_channel(0), a.max_lag);
    if (res.saturated) {
      ++saturated;
      ctx.err << "warning: scene " << r.id << " lag " << res.lag << " hit the search limit\n";
    }
    json j;
    j["id"] = r.id;
    j["lag"] = res.lag;
    j["peak_strength"] = res.peak_strength;
    j["saturated"] = res.saturated;
    j["injected_delay"] = r.injected_delay;
    out << j.dump() << "\n";
  }
  ctx.out << "aligned " << records.size() << " scenes (" << saturated << " saturated) -> "
          << a.report << "\n";
  return kExitOk;
}

struct EmbedArgs {
  std::string manifest;
  std::string cache;
};

void add_embed(CLI::App& app, EmbedArgs& a) {
  auto* c = app.add_subcommand("embed", "Compute speaker embeddings of every reference utterance");
  c->add_option("--manifest", a.manifest, "Scene manifest (JSONL)")->required();
  c->add_option("--cache", a.cache, "Embedding cache directory")->required();
}

int run_embed(const EmbedArgs& a, Context& ctx) {
  const auto records = read_manifest(a.manifest);
  EmbeddingCache cache(a.cache);
  cache.load();
  const std::size_t before = cache.size();
  std::set<fs::path> refs;
  for (const auto& r : records) refs.insert(r.reference);
  for (const auto& p : refs) embedding_for_file(p, &cache);
  cache.save();
  ctx.out << "cache " << a.cache << ": " << cache.size() << " embeddings ("
          << cache.size() - before << " new)\n";
  return kExitOk;
}

struct TrainArgs {
  std::string manifest;
  std::string valid;
  std::string config;
  std::string out;
  std::string cache;
  std::string lags;
  bool resume = false;
  bool verbose = false;
  std::uint64_t seed = 0;
  double lr = 0.0;
  std::size_t batch_size = 0;
  std::size_t max_epochs = 0;
  std::size_t max_steps = 0;
  std::size_t patience = 0;
  double crop_seconds = 0.0;
  CLI::App* cmd = nullptr;
};

void add_train(CLI::App& app, TrainArgs& a) {
  auto* c = app.add_subcommand("train", "Train a separation model");
  a.cmd = c;
  c->add_option("--manifest", a.manifest, "Training manifest (JSONL)")->required();
  c->add_option("--valid", a.valid, "Validation manifest (JSONL)")->required();
  c->add_option("--config", a.config, "Model config JSON with an optional \"train\" block")
      ->required();
  c->add_option("--out", a.out, "Output directory for checkpoints and the training log")
      ->required();
  c->add_option("--cache", a.cache, "Embedding cache directory");
  c->add_option("--lags", a.lags, "Lag report from `align`");
  c->add_flag("--resume", a.resume, "Continue from <out>/last.ckpt");
  c->add_flag("--verbose", a.verbose, "Print per-step progress");
  c->add_option("--seed", a.seed, "Random seed (overrides the config)");
  c->add_option("--lr", a.lr, "Learning rate (overrides the config)");
  c->add_option("--batch-size", a.batch_size, "Batch size (overrides the config)");
  c->add_option("--max-epochs", a.max_epochs, "Epoch limit (overrides the config)");
  c->add_option("--max-steps", a.max_steps, "Step limit, 0 for none (overrides the config)");
  c->add_option("--patience", a.patience, "Early-stopping patience (overrides the config)");
  c->add_option("--crop-seconds", a.crop_seconds, "Training crop length (overrides the config)");
}

int run_train(const TrainArgs& a, Context& ctx) {
  const std::string text = slurp(a.config);
  const ModelConfig model = model_config_from_json(text);
  TrainConfig cfg = train_config_from_json(text);
  const auto given = [&](const char* flag) { return a.cmd->count(flag) > 0; };
  if (given("--seed")) cfg.seed = a.seed;
  if (given("--lr")) cfg.learning_rate = a.lr;
  if (given("--batch-size")) cfg.batch_size = a.batch_size;
  if (given("--max-epochs")) cfg.max_epochs = a.max_epochs;
  if (given("--max-steps")) cfg.max_steps = a.max_steps;
  if (given("--patience")) cfg.patience = a.patience;
  if (given("--crop-seconds")) cfg.crop_seconds = a.crop_seconds;
  cfg.verbose = cfg.verbose || a.verbose;
  cfg.validate();

  auto train = read_manifest(a.manifest);
  auto valid = read_manifest(a.valid);
  apply_lags(train, a.lags);
  apply_lags(valid, a.lags);

  std::optional<EmbeddingCache> cache;
  if (!a.cache.empty()) {
    cache.emplace(a.cache);
    cache->load();
  }
  FitOptions options;
  options.out_dir = a.out;
  options.resume = a.resume;
  options.cache = cache ? &*cache : nullptr;
  std::ostream& out = ctx.out;
  options.on_epoch = [&out](const EpochLog& e) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "epoch %zu step %llu loss %.4f valid SI-SNR %.3f dB%s\n",
                  e.epoch, static_cast<unsigned long long>(e.step), e.train_loss, e.valid_si_snr,
                  e.improved ? " *" : "");
    out << buf << std::flush;
  };
  const FitResult r = fit(train, valid, model, cfg, options);
  if (cache) cache->save();
  ctx.out << "best validation SI-SNR " << r.best_valid_si_snr << " dB -> "
          << r.best_checkpoint.string() << "\n";
  if (r.skipped_samples > 0) ctx.err << "skipped " << r.skipped_samples << " scenes\n";
  if (r.saturated_alignments > 0) {
    ctx.err << r.saturated_alignments << " alignments hit the lag search limit\n";
  }
  return kExitOk;
}

struct SeparateArgs {
  std::string checkpoint;
  std::string mix;
  std::string ref;
  std::string out;
  std::size_t channel = 0;
};

void add_separate(CLI::App& app, SeparateArgs& a) {
  auto* c = app.add_subcommand("separate", "Extract the enrolled speaker from a mixture");
  c->add_option("--checkpoint", a.checkpoint, "Trained checkpoint")->required();
  c->add_option("--mix", a.mix, "Mixture WAV (2 channels for the dual model)")->required();
  c->add_option("--ref", a.ref, "Reference utterance of the target speaker (mono WAV)")
      ->required();
  c->add_option("--out", a.out, "Output WAV")->required();
  c->add_option("--channel", a.channel, "Input channel for single-channel models (0 or 1)")
      ->capture_default_str()
      ->check(CLI::Range(0, 1));
}

int run_separate(const SeparateArgs& a, Context& ctx) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  const Waveform mix = read_wav(a.mix);
  const Waveform ref = read_wav(a.ref);
  if (ck.params.config.dual() && mix.num_channels() != 2) {
    throw DataError(a.mix + ": the dual model needs a 2-channel mixture, got " +
                    std::to_string(mix.num_channels()));
  }
  if (ref.num_channels() != 1) throw DataError(a.ref + ": reference must be mono");
  const SpeakerEmbedding emb = compute_embedding(ref, a.ref);
  const std::size_t channel = std::min(a.channel, mix.num_channels() - 1);
  const Waveform est = separate_utterance(mix, emb, ck.params, channel);
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  write_wav(a.out, est);
  ctx.out << "wrote " << est.seconds() << " s to " << a.out << "\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string checkpoint;
  std::string manifest;
  std::string report;
  std::string cache;
  std::string lags;
  std::size_t max_lag = kDefaultMaxLag;
};

void add_evaluate(CLI::App& app, EvaluateArgs& a) {
  auto* c = app.add_subcommand("evaluate", "Score a checkpoint with Before/After/Improved SDR");
  c->add_option("--checkpoint", a.checkpoint, "Trained checkpoint")->required();
  c->add_option("--manifest", a.manifest, "Scene manifest (JSONL)")->required();
  c->add_option("--report", a.report, "Per-scene and aggregate report (JSONL)")->required();
  c->add_option("--cache", a.cache, "Embedding cache directory");
  c->add_option("--lags", a.lags, "Lag report from `align`");
  c->add_option("--max-lag", a.max_lag, "Alignment search range in samples")
      ->capture_default_str();
}

int run_evaluate(const EvaluateArgs& a, Context& ctx) {
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  auto records = read_manifest(a.manifest);
  if (records.empty()) throw DataError(a.manifest + ": manifest is empty");
  apply_lags(records, a.lags);
  std::optional<EmbeddingCache> cache;
  if (!a.cache.empty()) {
    cache.emplace(a.cache);
    cache->load();
  }
  std::ofstream out = open_out(a.report);
  Rng unused(0);
  double before = 0.0, after = 0.0, si = 0.0;
  for (const auto& r : records) {
    const Sample s = prepare_sample(r, ck.params.config.variant, a.max_lag, unused,
                                    SampleMode::kEvaluate, cache ? &*cache : nullptr);
    const Waveform est = separate_utterance(s.input, s.embedding, ck.params, s.channel);
    json j;
    j["id"] = r.id;
    j["before"] = sdr(s.input.channel(s.channel), s.truth);
    j["after"] = sdr(est.channel(0), s.truth);
    j["improved"] = j["after"].get<double>() - j["before"].get<double>();
    j["si_snr"] = si_snr(est.channel(0), s.truth);
    j["lag"] = s.lag;
    out << j.dump() << "\n";
    before += j["before"].get<double>();
    after += j["after"].get<double>();
    si += j["si_snr"].get<double>();
  }
  const double n = double(records.size());
  json agg;
  agg["aggregate"] = true;
  agg["model"] = variant_name(ck.params.config.variant);
  agg["count"] = records.size();
  agg["before"] = before / n;
  agg["after"] = after / n;
  agg["improved"] = (after - before) / n;
  agg["si_snr"] = si / n;
  out << agg.dump() << "\n";
  if (cache) cache->save();
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "%-14s %8s %8s %9s\n%-14s %8.2f %8.2f %9.2f\n", "model", "Before", "After",
                "Improved", variant_name(ck.params.config.variant).c_str(), before / n, after / n,
                (after - before) / n);
  ctx.out << buf;
  return kExitOk;
}

struct InspectArgs {
  std::string config;
  bool json_output = false;
};

void add_inspect(CLI::App& app, InspectArgs& a) {
  auto* c = app.add_subcommand("inspect", "Print parameter count and MACs per second of audio");
  c->add_option("--config", a.config, "Model config JSON")->required();
  c->add_flag("--json", a.json_output, "Print one JSON object instead of a table");
}

int run_inspect(const InspectArgs& a, Context& ctx) {
  const ModelConfig cfg = load_model_config(a.config);
  const std::size_t params = count_params(build_model(cfg, 0));
  const MacReport macs = mac_report(cfg, 1.0);
  if (a.json_output) {
    json j;
    j["variant"] = variant_name(cfg.variant);
    j["params"] = params;
    j["macs"] = macs.network;
    j["transform_macs"] = macs.transforms;
    j["frames"] = macs.frames;
    ctx.out << j.dump() << "\n";
    return kExitOk;
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "model          %s\nParams         %zu (%.2fM)\nMACs/1s        %llu (%.2fM)\n"
                "  + transforms %llu (%.2fM)\nframes/1s      %zu\n",
                variant_name(cfg.variant).c_str(), params, params / 1e6,
                static_cast<unsigned long long>(macs.network), macs.network / 1e6,
                static_cast<unsigned long long>(macs.transforms), macs.transforms / 1e6,
                macs.frames);
  ctx.out << buf;
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Target speaker separation for two-microphone phones.\n" + std::string(kExitCodes),
               "tss"};
  app.require_subcommand(1);
  app.footer(kExitCodes);
  SynthArgs synth;
  SimulateArgs simulate;
  AlignArgs align;
  EmbedArgs embed;
  TrainArgs train;
  SeparateArgs separate;
  EvaluateArgs evaluate;
  InspectArgs inspect;
  add_synth(app, synth);
  add_simulate(app, simulate);
  add_align(app, align);
  add_embed(app, embed);
  add_train(app, train);
  add_separate(app, separate);
  add_evaluate(app, evaluate);
  add_inspect(app, inspect);

  std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  Context ctx{out, err};
  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "synth-corpus") return run_synth(synth, ctx);
    if (name == "simulate") return run_simulate(simulate, ctx);
    if (name == "align") return run_align(align, ctx);
    if (name == "embed") return run_embed(embed, ctx);
    if (name == "train") return run_train(train, ctx);
    if (name == "separate") return run_separate(separate, ctx);
    if (name == "evaluate") return run_evaluate(evaluate, ctx);
    if (name == "inspect") return run_inspect(inspect, ctx);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const PreconditionError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  }
  err << "error: unknown subcommand " << name << "\n";
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace tss::cli

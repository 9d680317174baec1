// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tss/embedding.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>

#include "tss/errors.h"
#include "tss/rng.h"
#include "tss/stft.h"
#include "tss/wav.h"

namespace fs = std::filesystem;

namespace tss {
namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular filters on the HTK mel scale, bands x bins.
std::vector<std::vector<double>> mel_filterbank(std::size_t bands, std::size_t bins,
                                                std::size_t fft_size) {
  const double top = hz_to_mel(kSampleRate / 2.0);
  std::vector<double> edges(bands + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(top * double(i) / double(bands + 1));
  }
  std::vector<std::vector<double>> fb(bands, std::vector<double>(bins, 0.0));
  for (std::size_t b = 0; b < bands; ++b) {
    const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double hz = double(k) * kSampleRate / double(fft_size);
      if (hz > lo && hz < hi) fb[b][k] = hz <= mid ? (hz - lo) / (mid - lo) : (hi - hz) / (hi - mid);
    }
  }
  return fb;
}

// Columns orthonormal: 2*bands statistics embedded isometrically in `dim`.
std::vector<double> projection(std::size_t dim, std::size_t in, std::uint64_t seed) {
  if (dim < in) throw ConfigError("embedding dimension must be at least " + std::to_string(in));
  Rng rng(seed);
  std::vector<double> p(dim * in);  // column-major: column j at p[j*dim]
  for (double& v : p) v = rng.normal();
  for (std::size_t j = 0; j < in; ++j) {
    double* col = &p[j * dim];
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t q = 0; q < j; ++q) {
        const double* prev = &p[q * dim];
        double dot = 0.0;
        for (std::size_t i = 0; i < dim; ++i) dot += col[i] * prev[i];
        for (std::size_t i = 0; i < dim; ++i) col[i] -= dot * prev[i];
      }
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) norm += col[i] * col[i];
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < dim; ++i) col[i] /= norm;
  }
  return p;
}

void normalize(std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DegenerateSignalError("degenerate reference: embedding has zero norm");
  }
  for (double& x : v) x /= norm;
}

}  // namespace

SpeakerEmbedding compute_embedding(const Waveform& ref, const std::string& source,
                                   const EmbeddingOptions& options) {
  if (ref.num_channels() != 1) {
    throw PreconditionError("speaker reference must be mono, got " +
                            std::to_string(ref.num_channels()) + " channels");
  }
  if (ref.seconds() < options.min_seconds) {
    throw DegenerateSignalError("degenerate reference: " + std::to_string(ref.seconds()) +
                                " s is shorter than " + std::to_string(options.min_seconds) + " s");
  }
  double energy = 0.0;
  for (double v : ref.channel(0)) energy += v * v;
  if (!(energy > 0.0)) throw DegenerateSignalError("degenerate reference: signal is silent");

  const Stft stft;
  const ComplexSpectrogram spec = stft.analyze_complex(ref.channel(0));
  static const auto fb = mel_filterbank(kMelBands, stft.bins(), stft.config().fft_size);
  std::vector<std::vector<double>> logmel(spec.frames, std::vector<double>(kMelBands));
  std::vector<double> frame_energy(spec.frames, 0.0);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    for (std::size_t b = 0; b < kMelBands; ++b) {
      double e = 0.0;
      for (std::size_t k = 0; k < stft.bins(); ++k) {
        if (fb[b][k] != 0.0) e += fb[b][k] * std::norm(spec(t, k));
      }
      frame_energy[t] += e;
      logmel[t][b] = std::log(e + 1e-12);
    }
  }
  const double loudest = *std::max_element(frame_energy.begin(), frame_energy.end());
  const double floor = loudest * std::pow(10.0, -options.active_range_db / 10.0);
  std::vector<std::size_t> active;
  for (std::size_t t = 0; t < spec.frames; ++t) {
    if (frame_energy[t] >= floor) active.push_back(t);
  }

  std::vector<double> stats(2 * kMelBands, 0.0);
  for (std::size_t b = 0; b < kMelBands; ++b) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t t : active) mean += logmel[t][b];
    mean /= double(active.size());
    for (std::size_t t : active) sq += (logmel[t][b] - mean) * (logmel[t][b] - mean);
    stats[b] = mean;
    stats[kMelBands + b] = std::sqrt(sq / double(active.size()));
  }
  // Removing each half's average makes the statistics gain invariant and
  // keeps every speaker from sharing one dominant direction.
  for (std::size_t half = 0; half < 2; ++half) {
    double avg = 0.0;
    for (std::size_t b = 0; b < kMelBands; ++b) avg += stats[half * kMelBands + b];
    avg /= double(kMelBands);
    for (std::size_t b = 0; b < kMelBands; ++b) stats[half * kMelBands + b] -= avg;
  }

  static std::mutex mu;
  static std::map<std::pair<std::size_t, std::uint64_t>, std::vector<double>> projections;
  const std::vector<double>* proj;
  {
    std::lock_guard lock(mu);
    auto key = std::make_pair(options.dim, options.projection_seed);
    auto it = projections.find(key);
    if (it == projections.end()) {
      it = projections.emplace(key, projection(options.dim, stats.size(), options.projection_seed))
               .first;
    }
    proj = &it->second;
  }
  SpeakerEmbedding out;
  out.source = source;
  out.vector.assign(options.dim, 0.0);
  for (std::size_t j = 0; j < stats.size(); ++j) {
    const double* col = proj->data() + j * options.dim;
    for (std::size_t i = 0; i < options.dim; ++i) out.vector[i] += col[i] * stats[j];
  }
  normalize(out.vector);
  return out;
}

double cosine_similarity(const SpeakerEmbedding& a, const SpeakerEmbedding& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("embedding dimensions differ: " + std::to_string(a.dim()) + " vs " +
                         std::to_string(b.dim()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += a.vector[i] * b.vector[i];
  return std::clamp(dot, -1.0, 1.0);
}

EmbeddingCache::EmbeddingCache(fs::path dir, std::size_t dim) : dir_(std::move(dir)), dim_(dim) {}

void EmbeddingCache::load() {
  entries_.clear();
  const fs::path index_path = dir_ / "index.json";
  if (!fs::exists(index_path)) return;
  nlohmann::json index;
  try {
    std::ifstream in(index_path);
    index = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(index_path.string() + ": " + e.what());
  }
  if (index.value("dim", std::size_t(0)) != dim_) {
    throw DataError(index_path.string() + ": cache dimension " +
                    std::to_string(index.value("dim", std::size_t(0))) + " differs from " +
                    std::to_string(dim_));
  }
  const fs::path bin_path = dir_ / "embeddings.bin";
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw DataError("cannot open " + bin_path.string());
  for (const auto& [id, offset] : index.at("entries").items()) {
    std::vector<double> v(dim_);
    bin.seekg(std::streamoff(offset.get<std::size_t>() * dim_ * sizeof(double)));
    bin.read(reinterpret_cast<char*>(v.data()), std::streamsize(dim_ * sizeof(double)));
    if (!bin) throw DataError(bin_path.string() + ": truncated record for " + id);
    entries_[id] = std::move(v);
  }
}

void EmbeddingCache::save() const {
  fs::create_directories(dir_);
  nlohmann::json index;
  index["dim"] = dim_;
  index["entries"] = nlohmann::json::object();
  const fs::path bin_tmp = dir_ / "embeddings.bin.tmp";
  {
    std::ofstream bin(bin_tmp, std::ios::binary);
    std::size_t offset = 0;
    for (const auto& [id, v] : entries_) {
      bin.write(reinterpret_cast<const char*>(v.data()), std::streamsize(dim_ * sizeof(double)));
      index["entries"][id] = offset++;
    }
    if (!bin) throw DataError("cannot write " + bin_tmp.string());
  }
  const fs::path index_tmp = dir_ / "index.json.tmp";
  {
    std::ofstream out(index_tmp);
    out << index.dump(1) << '\n';
    if (!out) throw DataError("cannot write " + index_tmp.string());
  }
  fs::rename(bin_tmp, dir_ / "embeddings.bin");
  fs::rename(index_tmp, dir_ / "index.json");
}

std::optional<SpeakerEmbedding> EmbeddingCache::find(const std::string& id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) return std::nullopt;
  return SpeakerEmbedding{it->second, id};
}

void EmbeddingCache::put(const SpeakerEmbedding& embedding) {
  if (embedding.dim() != dim_) {
    throw DimensionError("cannot cache a " + std::to_string(embedding.dim()) +
                         "-dim embedding in a " + std::to_string(dim_) + "-dim cache");
  }
  entries_[embedding.source] = embedding.vector;
}

SpeakerEmbedding embedding_for_file(const fs::path& ref_path, EmbeddingCache* cache,
                                    const EmbeddingOptions& options) {
  const std::string id = fs::absolute(ref_path).lexically_normal().string();
  if (cache) {
    if (auto hit = cache->find(id)) return *hit;
  }
  SpeakerEmbedding e = compute_embedding(read_wav(ref_path), id, options);
  if (cache) cache->put(e);
  return e;
}

}  // namespace tss

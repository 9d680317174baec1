// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tss/waveform.h"

namespace tss {

inline constexpr std::size_t kEmbeddingDim = 256;
inline constexpr std::size_t kMelBands = 40;

struct SpeakerEmbedding {
  std::vector<double> vector;  // unit L2 norm
  std::string source;

  std::size_t dim() const { return vector.size(); }
};

struct EmbeddingOptions {
  std::size_t dim = kEmbeddingDim;
  std::uint64_t projection_seed = 0x5eedULL;
  double min_seconds = 1.0;
  double active_range_db = 40.0;  // frames this far below the loudest one are ignored
};

// Log-mel statistics of a mono reference, projected to `dim` and normalized.
SpeakerEmbedding compute_embedding(const Waveform& ref, const std::string& source = "",
                                   const EmbeddingOptions& options = {});

double cosine_similarity(const SpeakerEmbedding& a, const SpeakerEmbedding& b);

// Flat binary of float64 vectors plus a JSON index mapping utterance ids to
// record offsets. Single writer, many readers.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path dir, std::size_t dim = kEmbeddingDim);

  // Reads an existing cache; a missing directory yields an empty cache.
  void load();
  void save() const;

  std::optional<SpeakerEmbedding> find(const std::string& id) const;
  void put(const SpeakerEmbedding& embedding);
  std::size_t size() const { return entries_.size(); }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::size_t dim_;
  std::map<std::string, std::vector<double>> entries_;
};

// Cached lookup keyed by the absolute path of the reference file.
SpeakerEmbedding embedding_for_file(const std::filesystem::path& ref_path, EmbeddingCache* cache,
                                    const EmbeddingOptions& options = {});

}  // namespace tss

// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <string>

#include "tss/stft.h"

namespace tss {

enum class Variant { kDual, kSingleHalf, kSingleEqual };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);

// Magnitude features fed to the network. The mask is always applied to the
// raw channel-1 magnitude.
enum class FeatureTransform { kLinear, kLog1p };

struct ModelConfig {
  Variant variant = Variant::kDual;
  std::size_t bins = 257;            // F
  std::size_t embedding_dim = 256;   // D
  std::size_t compress_dim = 256;    // C, output of the input FC
  std::size_t fc1_dim = 256;
  std::size_t lstm_hidden = 256;
  std::size_t fc2_dim = 200;
  std::size_t fc4_dim = 180;
  std::size_t fc6_dim = 514;
  bool mask_compress = true;         // 1x1 layer fc6_dim -> bins before the sigmoid
  FeatureTransform features = FeatureTransform::kLinear;
  StftConfig stft;

  bool dual() const { return variant == Variant::kDual; }
  std::size_t channels() const { return dual() ? 2 : 1; }
  std::size_t input_dim() const { return channels() * bins; }

  // Throws ConfigError naming the first inconsistency.
  void validate() const;

  static ModelConfig preset(Variant v);
  // Small model with the same topology, for tests and quick experiments.
  static ModelConfig micro(Variant v, std::size_t bins, std::size_t hidden, std::size_t emb_dim);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

std::string to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const std::string& text);
ModelConfig load_model_config(const std::filesystem::path& path);

}  // namespace tss

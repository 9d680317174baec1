// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tss/model_config.h"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "tss/errors.h"

using nlohmann::json;

namespace tss {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kDual: return "dual";
    case Variant::kSingleHalf: return "single_half";
    case Variant::kSingleEqual: return "single_equal";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  if (name == "dual") return Variant::kDual;
  if (name == "single_half") return Variant::kSingleHalf;
  if (name == "single_equal") return Variant::kSingleEqual;
  throw ConfigError("unknown variant '" + name + "' (expected dual, single_half or single_equal)");
}

void ModelConfig::validate() const {
  const auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(bins, "bins");
  positive(embedding_dim, "embedding_dim");
  positive(compress_dim, "compress_dim");
  positive(fc1_dim, "fc1_dim");
  positive(lstm_hidden, "lstm_hidden");
  positive(fc2_dim, "fc2_dim");
  positive(fc4_dim, "fc4_dim");
  positive(fc6_dim, "fc6_dim");
  if (mask_compress != dual()) {
    throw ConfigError(dual() ? "the dual variant needs the mask compress layer"
                             : "single-channel variants have no mask compress layer");
  }
  if (!mask_compress && fc6_dim != bins) {
    throw ConfigError("fc6_dim " + std::to_string(fc6_dim) + " must equal bins " +
                      std::to_string(bins) + " without a mask compress layer");
  }
  if (lstm_hidden != compress_dim) {
    throw ConfigError("lstm_hidden " + std::to_string(lstm_hidden) + " must equal compress_dim " +
                      std::to_string(compress_dim) + " for the skip connection");
  }
}

ModelConfig ModelConfig::preset(Variant v) {
  ModelConfig c;
  c.variant = v;
  switch (v) {
    case Variant::kDual:
      break;
    case Variant::kSingleEqual:
      c.fc6_dim = 257;
      c.mask_compress = false;
      break;
    case Variant::kSingleHalf:
      c.compress_dim = 128;
      c.fc1_dim = 128;
      c.lstm_hidden = 128;
      c.fc2_dim = 100;
      c.fc4_dim = 90;
      c.fc6_dim = 257;
      c.mask_compress = false;
      break;
  }
  return c;
}

ModelConfig ModelConfig::micro(Variant v, std::size_t bins, std::size_t hidden,
                               std::size_t emb_dim) {
  ModelConfig c;
  c.variant = v;
  c.bins = bins;
  c.embedding_dim = emb_dim;
  c.compress_dim = hidden;
  c.fc1_dim = hidden;
  c.lstm_hidden = hidden;
  c.fc2_dim = hidden;
  c.fc4_dim = hidden;
  c.mask_compress = v == Variant::kDual;
  c.fc6_dim = c.mask_compress ? 2 * bins : bins;
  return c;
}

std::string to_json(const ModelConfig& c) {
  json j;
  j["variant"] = variant_name(c.variant);
  j["bins"] = c.bins;
  j["embedding_dim"] = c.embedding_dim;
  j["compress_dim"] = c.compress_dim;
  j["fc1_dim"] = c.fc1_dim;
  j["lstm_hidden"] = c.lstm_hidden;
  j["fc2_dim"] = c.fc2_dim;
  j["fc4_dim"] = c.fc4_dim;
  j["fc6_dim"] = c.fc6_dim;
  j["mask_compress"] = c.mask_compress;
  j["features"] = c.features == FeatureTransform::kLog1p ? "log1p" : "linear";
  j["stft"] = {{"window_length", c.stft.window_length},
               {"fft_size", c.stft.fft_size},
               {"hop", c.stft.hop}};
  return j.dump(2);
}

ModelConfig model_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config is not valid JSON: ") + e.what());
  }
  try {
    // Missing fields fall back to the preset of the named variant.
    ModelConfig c = ModelConfig::preset(parse_variant(j.at("variant").get<std::string>()));
    c.bins = j.value("bins", c.bins);
    c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
    c.compress_dim = j.value("compress_dim", c.compress_dim);
    c.fc1_dim = j.value("fc1_dim", c.fc1_dim);
    c.lstm_hidden = j.value("lstm_hidden", c.lstm_hidden);
    c.fc2_dim = j.value("fc2_dim", c.fc2_dim);
    c.fc4_dim = j.value("fc4_dim", c.fc4_dim);
    c.fc6_dim = j.value("fc6_dim", c.fc6_dim);
    c.mask_compress = j.value("mask_compress", c.mask_compress);
    const std::string features = j.value("features", std::string("linear"));
    if (features == "log1p") {
      c.features = FeatureTransform::kLog1p;
    } else if (features != "linear") {
      throw ConfigError("unknown feature transform '" + features + "'");
    }
    if (j.contains("stft")) {
      const json& s = j["stft"];
      c.stft.window_length = s.value("window_length", c.stft.window_length);
      c.stft.fft_size = s.value("fft_size", c.stft.fft_size);
      c.stft.hop = s.value("hop", c.stft.hop);
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid model config: ") + e.what());
  }
}

ModelConfig load_model_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return model_config_from_json(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace tss

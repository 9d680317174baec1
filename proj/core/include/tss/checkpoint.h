// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>

#include "tss/adam.h"
#include "tss/lstmformer.h"

namespace tss {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  AdamState adam;
  std::size_t epoch = 0;
  std::uint64_t step = 0;
  double best_valid_si_snr = -std::numeric_limits<double>::infinity();
  std::size_t epochs_without_improvement = 0;
  std::string rng_state;
  std::string train_config;  // JSON, informational
};

// Magic, version, JSON metadata, then named little-endian float64 arrays.
// Written to a temporary file and renamed into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tss

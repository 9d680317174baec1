// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tss/scene.h"

namespace tss {

// One simulated scene. Rendered audio paths are stored relative to the
// manifest directory and resolved to absolute paths on load.
struct SceneRecord {
  std::string id;
  std::string split;  // "train", "valid" or "test"
  std::string target_speaker;
  std::string interferer_speaker;
  std::filesystem::path clean_target;
  std::filesystem::path clean_interferer;
  std::filesystem::path reference_source;  // corpus utterance used for the embedding
  std::filesystem::path mixture;           // 2 channels
  std::filesystem::path truth;             // target at mic 1
  std::filesystem::path reference;         // copy of reference_source
  long injected_delay = 0;
  double sir_db = 0.0;
  double seconds = 0.0;
  SceneGeometry geometry;
  RoomSpec room;
  std::optional<long> lag;  // cached truth-vs-mixture delay from the align step
};

std::string to_json_line(const SceneRecord& record, const std::filesystem::path& base_dir);
SceneRecord parse_record(std::string_view line, const std::filesystem::path& base_dir);
std::vector<SceneRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<SceneRecord>& records);

struct ManifestSpec {
  std::size_t train_scenes = 0;
  std::size_t valid_scenes = 0;
  std::size_t test_scenes = 0;
  std::uint64_t seed = 1;
  double sir_min_db = -5.0;
  double sir_max_db = 5.0;
  std::size_t max_injected_delay = 400;
  double geometry_jitter = 0.05;
  double t60_min = 0.45;
  double t60_max = 0.55;
  double noise_floor_db = -50.0;

  // Scene counts for the requested hours, assuming `scene_seconds` per scene.
  static ManifestSpec from_hours(double train_hours, double valid_hours, double test_hours,
                                 double scene_seconds);
};

struct ManifestSummary {
  std::vector<SceneRecord> records;
  std::vector<std::string> skipped_files;  // unreadable corpus audio
  std::filesystem::path manifest_path;
};

// Renders scenes from a corpus laid out as `<corpus>/<speaker>/<utt>.wav`.
// Pairings are seeded; target and interferer speakers always differ; train
// and test speakers are disjoint. Writes `out_dir/{mix,truth,ref}/scene_<id>.wav`,
// `out_dir/manifest.jsonl` and one `<split>.jsonl` per non-empty split.
ManifestSummary build_manifest(const std::filesystem::path& corpus_dir, const ManifestSpec& spec,
                               const std::filesystem::path& out_dir);

}  // namespace tss

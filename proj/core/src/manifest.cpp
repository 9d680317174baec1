// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tss/manifest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>

#include "tss/errors.h"
#include "tss/wav.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tss {
namespace {

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

std::string relative_to(const fs::path& p, const fs::path& base) {
  if (p.empty()) return "";
  const fs::path abs = fs::absolute(p).lexically_normal();
  const fs::path rel = abs.lexically_relative(fs::absolute(base).lexically_normal());
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return abs.generic_string();
}

fs::path resolve(const std::string& p, const fs::path& base) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

struct Utterance {
  std::string speaker;
  fs::path path;
};

struct Candidate {
  std::size_t target;      // index into utterances
  std::size_t interferer;  // index into utterances
};

std::vector<Candidate> enumerate_pairs(const std::vector<Utterance>& utts,
                                       const std::vector<std::string>& pool) {
  std::map<std::string, std::size_t> count;
  for (const auto& u : utts) ++count[u.speaker];
  const auto in_pool = [&](const std::string& s) {
    return std::find(pool.begin(), pool.end(), s) != pool.end();
  };
  std::vector<Candidate> out;
  for (std::size_t t = 0; t < utts.size(); ++t) {
    // The target speaker needs a second utterance for the embedding.
    if (!in_pool(utts[t].speaker) || count[utts[t].speaker] < 2) continue;
    for (std::size_t i = 0; i < utts.size(); ++i) {
      if (in_pool(utts[i].speaker) && utts[i].speaker != utts[t].speaker) out.push_back({t, i});
    }
  }
  return out;
}

}  // namespace

std::string to_json_line(const SceneRecord& r, const fs::path& base_dir) {
  json j;
  j["id"] = r.id;
  j["split"] = r.split;
  j["target_speaker"] = r.target_speaker;
  j["interferer_speaker"] = r.interferer_speaker;
  j["clean_target"] = relative_to(r.clean_target, base_dir);
  j["clean_interferer"] = relative_to(r.clean_interferer, base_dir);
  j["reference_source"] = relative_to(r.reference_source, base_dir);
  j["mixture"] = relative_to(r.mixture, base_dir);
  j["truth"] = relative_to(r.truth, base_dir);
  j["reference"] = relative_to(r.reference, base_dir);
  j["injected_delay"] = r.injected_delay;
  j["sir_db"] = r.sir_db;
  j["seconds"] = r.seconds;
  j["geometry"] = {{"target", vec_json(r.geometry.target)},
                   {"interferer", vec_json(r.geometry.interferer)},
                   {"mic1", vec_json(r.geometry.mic1)},
                   {"mic2", vec_json(r.geometry.mic2)}};
  j["room"] = {{"width", r.room.width},
               {"length", r.room.length},
               {"height", r.room.height},
               {"t60", r.room.t60},
               {"noise_floor_db", r.room.noise_floor_db}};
  if (r.lag) j["lag"] = *r.lag;
  return j.dump();
}

SceneRecord parse_record(std::string_view line, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed manifest line: ") + e.what());
  }
  try {
    SceneRecord r;
    r.id = j.at("id").get<std::string>();
    r.split = j.value("split", std::string("train"));
    r.target_speaker = j.value("target_speaker", std::string());
    r.interferer_speaker = j.value("interferer_speaker", std::string());
    r.clean_target = resolve(j.value("clean_target", std::string()), base_dir);
    r.clean_interferer = resolve(j.value("clean_interferer", std::string()), base_dir);
    r.reference_source = resolve(j.value("reference_source", std::string()), base_dir);
    r.mixture = resolve(j.at("mixture").get<std::string>(), base_dir);
    r.truth = resolve(j.at("truth").get<std::string>(), base_dir);
    r.reference = resolve(j.at("reference").get<std::string>(), base_dir);
    r.injected_delay = j.value("injected_delay", 0L);
    r.sir_db = j.value("sir_db", 0.0);
    r.seconds = j.value("seconds", 0.0);
    if (j.contains("geometry")) {
      const json& g = j["geometry"];
      r.geometry = {vec_from(g.at("target")), vec_from(g.at("interferer")), vec_from(g.at("mic1")),
                    vec_from(g.at("mic2"))};
    }
    if (j.contains("room")) {
      const json& room = j["room"];
      r.room.width = room.value("width", r.room.width);
      r.room.length = room.value("length", r.room.length);
      r.room.height = room.value("height", r.room.height);
      r.room.t60 = room.value("t60", r.room.t60);
      r.room.noise_floor_db = room.value("noise_floor_db", r.room.noise_floor_db);
    }
    if (j.contains("lag") && !j["lag"].is_null()) r.lag = j["lag"].get<long>();
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("manifest record missing or invalid field: ") + e.what());
  }
}

std::vector<SceneRecord> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  const fs::path base = fs::absolute(path).parent_path();
  std::vector<SceneRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_record(line, base));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_manifest(const fs::path& path, const std::vector<SceneRecord>& records) {
  const fs::path base = fs::absolute(path).parent_path();
  fs::create_directories(base);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write manifest " + path.string());
    for (const auto& r : records) out << to_json_line(r, base) << '\n';
    if (!out) throw DataError("write failed for " + path.string());
  }
  fs::rename(tmp, path);
}

ManifestSpec ManifestSpec::from_hours(double train_hours, double valid_hours, double test_hours,
                                      double scene_seconds) {
  if (!(scene_seconds > 0.0)) throw PreconditionError("scene length must be positive");
  ManifestSpec spec;
  spec.train_scenes = std::size_t(std::lround(train_hours * 3600.0 / scene_seconds));
  spec.valid_scenes = std::size_t(std::lround(valid_hours * 3600.0 / scene_seconds));
  spec.test_scenes = std::size_t(std::lround(test_hours * 3600.0 / scene_seconds));
  return spec;
}

ManifestSummary build_manifest(const fs::path& corpus_dir, const ManifestSpec& spec,
                               const fs::path& out_dir) {
  if (!fs::is_directory(corpus_dir)) {
    throw DataError("corpus directory " + corpus_dir.string() + " does not exist");
  }
  ManifestSummary summary;
  const auto readable = [&summary](const fs::path& p) {
    try {
      if (read_wav(p).num_channels() != 1) throw DataError(p.string() + ": corpus audio must be mono");
      return true;
    } catch (const DataError& e) {
      summary.skipped_files.push_back(p.string());
      std::cerr << "warning: skipping unreadable audio " << e.what() << "\n";
      return false;
    }
  };
  std::vector<Utterance> utts;
  std::vector<std::string> speakers;
  std::vector<fs::path> speaker_dirs;
  for (const auto& entry : fs::directory_iterator(corpus_dir)) {
    if (entry.is_directory()) speaker_dirs.push_back(entry.path());
  }
  std::sort(speaker_dirs.begin(), speaker_dirs.end());
  for (const auto& dir : speaker_dirs) {
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(dir)) {
      if (f.is_regular_file() && f.path().extension() == ".wav") files.push_back(f.path());
    }
    std::sort(files.begin(), files.end());
    std::erase_if(files, [&](const fs::path& f) { return !readable(f); });
    if (files.empty()) continue;
    const std::string name = dir.filename().string();
    speakers.push_back(name);
    for (auto& f : files) utts.push_back({name, fs::absolute(f).lexically_normal()});
  }
  if (speakers.size() < 4) {
    throw DataError("corpus " + corpus_dir.string() + " has " + std::to_string(speakers.size()) +
                    " speakers with audio; at least 4 are required");
  }

  Rng rng(spec.seed);
  std::vector<std::string> shuffled = speakers;
  rng.shuffle(shuffled);
  const std::size_t n = shuffled.size();
  std::size_t n_test = 0, n_valid = 0;
  if (spec.test_scenes > 0) n_test = std::max<std::size_t>(2, std::lround(0.25 * double(n)));
  if (spec.valid_scenes > 0 && n - n_test >= 6) {
    n_valid = std::max<std::size_t>(2, std::lround(0.2 * double(n)));
  }
  if (n - n_test - n_valid < 2) {
    throw DataError("not enough speakers (" + std::to_string(n) +
                    ") for speaker-disjoint train and test splits");
  }
  const std::vector<std::string> test_pool(shuffled.begin(), shuffled.begin() + long(n_test));
  const std::vector<std::string> valid_pool(shuffled.begin() + long(n_test),
                                            shuffled.begin() + long(n_test + n_valid));
  const std::vector<std::string> train_pool(shuffled.begin() + long(n_test + n_valid),
                                            shuffled.end());

  struct Plan {
    std::string split;
    std::size_t count;
    std::vector<Candidate> candidates;
  };
  auto train_candidates = enumerate_pairs(utts, train_pool);
  rng.shuffle(train_candidates);
  std::vector<Plan> plans;
  if (n_valid == 0) {
    // Validation shares the training speakers but never a training pairing.
    const std::size_t need = spec.train_scenes + spec.valid_scenes;
    if (need > train_candidates.size()) {
      throw DataError("requested " + std::to_string(need) + " train+valid scenes but only " +
                      std::to_string(train_candidates.size()) +
                      " distinct pairings exist (shortfall " +
                      std::to_string(need - train_candidates.size()) + ")");
    }
    std::vector<Candidate> valid_part(train_candidates.begin() + long(spec.train_scenes),
                                      train_candidates.end());
    train_candidates.resize(spec.train_scenes);
    plans.push_back({"train", spec.train_scenes, std::move(train_candidates)});
    plans.push_back({"valid", spec.valid_scenes, std::move(valid_part)});
  } else {
    plans.push_back({"train", spec.train_scenes, std::move(train_candidates)});
    auto valid_candidates = enumerate_pairs(utts, valid_pool);
    rng.shuffle(valid_candidates);
    plans.push_back({"valid", spec.valid_scenes, std::move(valid_candidates)});
  }
  auto test_candidates = enumerate_pairs(utts, test_pool);
  rng.shuffle(test_candidates);
  plans.push_back({"test", spec.test_scenes, std::move(test_candidates)});
  for (const auto& p : plans) {
    if (p.count > p.candidates.size()) {
      throw DataError("requested " + std::to_string(p.count) + " " + p.split + " scenes but only " +
                      std::to_string(p.candidates.size()) + " distinct pairings exist (shortfall " +
                      std::to_string(p.count - p.candidates.size()) + ")");
    }
  }

  fs::create_directories(out_dir / "mix");
  fs::create_directories(out_dir / "truth");
  fs::create_directories(out_dir / "ref");
  std::map<fs::path, Waveform> audio;
  const auto load = [&](const fs::path& p) -> const Waveform& {
    auto it = audio.find(p);
    if (it == audio.end()) it = audio.emplace(p, read_wav(p)).first;
    return it->second;
  };

  std::size_t scene_index = 0;
  char id_buf[16];
  for (const auto& plan : plans) {
    for (std::size_t c = 0; c < plan.count; ++c) {
      const Utterance& tu = utts[plan.candidates[c].target];
      const Utterance& iu = utts[plan.candidates[c].interferer];
      Rng scene_rng(derive_seed(spec.seed, 1000 + scene_index));
      std::vector<std::size_t> refs;
      for (std::size_t k = 0; k < utts.size(); ++k) {
        if (utts[k].speaker == tu.speaker && utts[k].path != tu.path) refs.push_back(k);
      }
      const Utterance& ru = utts[refs[scene_rng.index(refs.size())]];
      const Waveform& tw = load(tu.path);
      const Waveform& iw = load(iu.path);
      const Waveform& rw = load(ru.path);

      RoomSpec room = random_room(scene_rng, spec.t60_min, spec.t60_max);
      room.noise_floor_db = spec.noise_floor_db;
      const SceneGeometry geometry = jittered_geometry(scene_rng, spec.geometry_jitter);
      const double sir = scene_rng.uniform(spec.sir_min_db, spec.sir_max_db);
      const std::size_t delay =
          std::size_t(scene_rng.integer(0, static_cast<long long>(spec.max_injected_delay)));
      const MixResult mix =
          mix_scene(tw, iw, geometry, room, sir, delay, derive_seed(spec.seed, 5000 + scene_index));

      std::snprintf(id_buf, sizeof(id_buf), "%06zu", scene_index);
      SceneRecord r;
      r.id = id_buf;
      r.split = plan.split;
      r.target_speaker = tu.speaker;
      r.interferer_speaker = iu.speaker;
      r.clean_target = tu.path;
      r.clean_interferer = iu.path;
      r.reference_source = ru.path;
      const std::string file = "scene_" + r.id + ".wav";
      r.mixture = out_dir / "mix" / file;
      r.truth = out_dir / "truth" / file;
      r.reference = out_dir / "ref" / file;
      r.injected_delay = long(delay);
      r.sir_db = sir;
      r.seconds = mix.mixture.seconds();
      r.geometry = geometry;
      r.room = room;
      write_wav(r.mixture, mix.mixture);
      write_wav(r.truth, mix.truth);
      write_wav(r.reference, rw);
      summary.records.push_back(std::move(r));
      ++scene_index;
    }
  }

  summary.manifest_path = out_dir / "manifest.jsonl";
  write_manifest(summary.manifest_path, summary.records);
  for (const char* split : {"train", "valid", "test"}) {
    std::vector<SceneRecord> part;
    for (const auto& r : summary.records)
      if (r.split == split) part.push_back(r);
    if (!part.empty()) write_manifest(out_dir / (std::string(split) + ".jsonl"), part);
  }
  return summary;
}

}  // namespace tss

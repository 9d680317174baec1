// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tss/checkpoint.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>

#include "tss/errors.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace tss {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'T', 'S', 'S', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in, const fs::path& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw DataError(path.string() + ": truncated checkpoint");
  return v;
}

void put_array(std::ostream& out, const std::string& name, const Tensor& t) {
  put<std::uint32_t>(out, std::uint32_t(name.size()));
  out.write(name.data(), std::streamsize(name.size()));
  put<std::uint32_t>(out, std::uint32_t(t.rank()));
  for (std::size_t d : t.shape()) put<std::uint64_t>(out, d);
  out.write(reinterpret_cast<const char*>(t.data()), std::streamsize(t.size() * sizeof(double)));
}

std::pair<std::string, Tensor> get_array(std::istream& in, const fs::path& path) {
  const auto name_len = get<std::uint32_t>(in, path);
  if (name_len > 4096) throw DataError(path.string() + ": corrupt array name");
  std::string name(name_len, '\0');
  in.read(name.data(), name_len);
  const auto rank = get<std::uint32_t>(in, path);
  if (rank < 1 || rank > 2) throw DataError(path.string() + ": array " + name + " has bad rank");
  std::vector<std::size_t> shape(rank);
  std::size_t count = 1;
  for (auto& d : shape) {
    d = get<std::uint64_t>(in, path);
    if (d == 0 || d > (std::size_t(1) << 32)) {
      throw DataError(path.string() + ": array " + name + " has bad shape");
    }
    count *= d;
  }
  std::vector<double> values(count);
  in.read(reinterpret_cast<char*>(values.data()), std::streamsize(count * sizeof(double)));
  if (!in) throw DataError(path.string() + ": truncated array " + name);
  return {name, Tensor(std::move(shape), std::move(values))};
}

// JSON cannot hold infinities.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void save_checkpoint(const fs::path& path, const Checkpoint& c) {
  json meta;
  meta["config"] = json::parse(to_json(c.params.config));
  meta["epoch"] = c.epoch;
  meta["step"] = c.step;
  meta["best_valid_si_snr"] = finite_or_null(c.best_valid_si_snr);
  meta["epochs_without_improvement"] = c.epochs_without_improvement;
  meta["rng_state"] = c.rng_state;
  meta["train_config"] = c.train_config;
  meta["adam"] = {{"beta1", c.adam.beta1},
                  {"beta2", c.adam.beta2},
                  {"eps", c.adam.eps},
                  {"step", c.adam.step}};
  const auto vars = c.params.variables();
  meta["arrays"] = vars.size() + c.adam.m.size() + c.adam.v.size();
  const std::string meta_text = meta.dump();

  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint " + tmp.string());
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kCheckpointVersion);
    put<std::uint64_t>(out, meta_text.size());
    out.write(meta_text.data(), std::streamsize(meta_text.size()));
    for (const Variable* v : vars) put_array(out, "param/" + v->name, v->value);
    for (const auto& [name, t] : c.adam.m) put_array(out, "adam.m/" + name, t);
    for (const auto& [name, t] : c.adam.v) put_array(out, "adam.v/" + name, t);
    out.flush();
    if (!out) throw DataError("write failed for checkpoint " + tmp.string());
  }
  fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path.string() + ": not a tss checkpoint");
  }
  const auto version = get<std::uint32_t>(in, path);
  if (version != kCheckpointVersion) {
    throw DataError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto meta_len = get<std::uint64_t>(in, path);
  if (meta_len > (1u << 24)) throw DataError(path.string() + ": corrupt metadata length");
  std::string meta_text(meta_len, '\0');
  in.read(meta_text.data(), std::streamsize(meta_len));
  if (!in) throw DataError(path.string() + ": truncated metadata");

  Checkpoint c;
  std::size_t arrays = 0;
  try {
    const json meta = json::parse(meta_text);
    c.params = build_model(model_config_from_json(meta.at("config").dump()), 0);
    c.epoch = meta.at("epoch").get<std::size_t>();
    c.step = meta.at("step").get<std::uint64_t>();
    const json& best = meta.at("best_valid_si_snr");
    c.best_valid_si_snr =
        best.is_null() ? -std::numeric_limits<double>::infinity() : best.get<double>();
    c.epochs_without_improvement = meta.at("epochs_without_improvement").get<std::size_t>();
    c.rng_state = meta.at("rng_state").get<std::string>();
    c.train_config = meta.value("train_config", std::string());
    const json& adam = meta.at("adam");
    c.adam.beta1 = adam.at("beta1").get<double>();
    c.adam.beta2 = adam.at("beta2").get<double>();
    c.adam.eps = adam.at("eps").get<double>();
    c.adam.step = adam.at("step").get<std::uint64_t>();
    arrays = meta.at("arrays").get<std::size_t>();
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": bad checkpoint metadata: " + e.what());
  }

  std::map<std::string, Variable*> by_name;
  for (Variable* v : c.params.variables()) by_name[v->name] = v;
  std::size_t params_seen = 0;
  for (std::size_t i = 0; i < arrays; ++i) {
    auto [name, t] = get_array(in, path);
    const auto slash = name.find('/');
    const std::string kind = name.substr(0, slash);
    const std::string var = slash == std::string::npos ? "" : name.substr(slash + 1);
    if (kind == "param") {
      auto it = by_name.find(var);
      if (it == by_name.end() || !it->second->value.same_shape(t)) {
        throw DataError(path.string() + ": parameter " + var + " does not fit the model config");
      }
      it->second->value = std::move(t);
      ++params_seen;
    } else if (kind == "adam.m") {
      c.adam.m[var] = std::move(t);
    } else if (kind == "adam.v") {
      c.adam.v[var] = std::move(t);
    } else {
      throw DataError(path.string() + ": unknown array " + name);
    }
  }
  if (params_seen != by_name.size()) {
    throw DataError(path.string() + ": checkpoint holds " + std::to_string(params_seen) + " of " +
                    std::to_string(by_name.size()) + " parameters");
  }
  return c;
}

}  // namespace tss

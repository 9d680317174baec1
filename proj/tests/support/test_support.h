// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tss/rng.h"
#include "tss/tensor.h"

namespace tss::testing {

inline std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double scale = 0.1) {
  Rng rng(seed);
  std::vector<double> x(n);
  for (double& v : x) v = scale * rng.normal();
  return x;
}

// First-order lowpass noise with a slow amplitude envelope.
inline std::vector<double> speech_like_noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(n);
  double state = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    state = 0.9 * state + rng.normal();
    const double env = 0.6 + 0.4 * std::sin(2.0 * M_PI * 3.0 * double(i) / 16000.0);
    x[i] = 0.02 * env * state;
  }
  return x;
}

inline Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

// Fresh directory under the system temp dir, removed by the destructor.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng(std::hash<std::string>{}(tag) ^ std::uint64_t(::getpid()));
    path_ = std::filesystem::temp_directory_path() /
            ("tss_" + tag + "_" + std::to_string(rng.next() % 1000000000ULL));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace tss::testing

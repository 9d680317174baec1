// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tss {

inline constexpr int kSampleRate = 16000;

// Mono or dual-channel audio at 16 kHz; channels are equal-length tracks.
class Waveform {
 public:
  Waveform() = default;
  explicit Waveform(std::vector<std::vector<double>> channels, int sample_rate = kSampleRate);

  static Waveform mono(std::vector<double> samples) { return Waveform({std::move(samples)}); }
  static Waveform stereo(std::vector<double> first, std::vector<double> second) {
    return Waveform({std::move(first), std::move(second)});
  }

  std::size_t num_channels() const { return channels_.size(); }
  std::size_t length() const { return channels_.empty() ? 0 : channels_[0].size(); }
  int sample_rate() const { return sample_rate_; }
  double seconds() const { return double(length()) / sample_rate_; }

  std::span<const double> channel(std::size_t i) const { return channels_.at(i); }
  std::vector<double>& channel_mut(std::size_t i) { return channels_.at(i); }
  Waveform take_channel(std::size_t i) const { return mono(channels_.at(i)); }

  friend bool operator==(const Waveform&, const Waveform&) = default;

 private:
  std::vector<std::vector<double>> channels_;
  int sample_rate_ = kSampleRate;
};

}  // namespace tss

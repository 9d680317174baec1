// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "tss/tensor.h"
#include "tss/waveform.h"

namespace tss {

// Fixed (non-trainable) analysis/synthesis framing. Defaults give 257
// frequency bins at 100 frames per second.
struct StftConfig {
  std::size_t window_length = 400;
  std::size_t fft_size = 512;
  std::size_t hop = 160;

  std::size_t bins() const { return fft_size / 2 + 1; }
  friend bool operator==(const StftConfig&, const StftConfig&) = default;
};

struct SpectrogramPair {
  Tensor mag;    // T x F, non-negative
  Tensor phase;  // T x F, radians in (-pi, pi]
  StftConfig config;

  std::size_t frames() const { return mag.rows(); }
  std::size_t bins() const { return mag.cols(); }
};

// Complex short-time spectrum, row-major T x F.
struct ComplexSpectrogram {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::vector<std::complex<double>> values;

  std::complex<double> operator()(std::size_t t, std::size_t f) const {
    return values[t * bins + f];
  }
};

// Periodic Hann analysis window with weighted-overlap-add synthesis,
// normalized by the summed squared window. Construction rejects framings
// whose overlap leaves gaps (the normalization would divide by zero).
class Stft {
 public:
  explicit Stft(StftConfig config = {});

  const StftConfig& config() const { return config_; }
  std::size_t bins() const { return config_.bins(); }
  std::span<const double> window() const { return window_; }
  // T = 1 + floor((L - window_length) / hop); throws if L < window_length.
  std::size_t num_frames(std::size_t length) const;
  // First and one-past-last sample index reconstructed exactly by
  // synthesize(analyze(x)) for a signal of the given length.
  std::pair<std::size_t, std::size_t> interior(std::size_t length) const;

  ComplexSpectrogram analyze_complex(std::span<const double> samples) const;
  SpectrogramPair analyze(std::span<const double> samples) const;
  std::vector<double> synthesize(const Tensor& mag, const Tensor& phase,
                                 std::size_t out_length) const;
  // Gradient of <grad_wave, synthesize(mag, phase)> with respect to mag.
  Tensor synthesize_mag_adjoint(const Tensor& phase, std::span<const double> grad_wave) const;

 private:
  StftConfig config_;
  std::vector<double> window_;
  std::vector<double> norm_period_;  // summed squared window over one hop, steady state
  double norm_floor_ = 0.0;

  std::vector<double> overlap_norm(std::size_t frames, std::size_t out_length) const;
};

SpectrogramPair stft_analyze(const Waveform& wave, const StftConfig& config = {});
Waveform istft_synthesize(const Tensor& mag, const Tensor& phase, const StftConfig& config,
                          std::size_t out_length);
// Element-wise product m1 * r; every r entry must lie in [0, 1].
Tensor apply_mask(const Tensor& m1, const Tensor& r);

}  // namespace tss

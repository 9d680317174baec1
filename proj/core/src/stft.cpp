// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tss/stft.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "tss/errors.h"
#include "tss/fft.h"

namespace tss {

Stft::Stft(StftConfig config) : config_(config) {
  const auto& c = config_;
  if (c.window_length < 2 || c.hop == 0 || c.fft_size < c.window_length) {
    throw ConfigError("invalid STFT framing: window " + std::to_string(c.window_length) +
                      ", fft " + std::to_string(c.fft_size) + ", hop " + std::to_string(c.hop));
  }
  window_.resize(c.window_length);
  for (std::size_t n = 0; n < c.window_length; ++n) {
    window_[n] = 0.5 - 0.5 * std::cos(2.0 * M_PI * double(n) / double(c.window_length));
  }
  norm_period_.assign(c.hop, 0.0);
  for (std::size_t n = 0; n < c.window_length; ++n) {
    norm_period_[n % c.hop] += window_[n] * window_[n];
  }
  const double steady = *std::min_element(norm_period_.begin(), norm_period_.end());
  if (steady < 1e-6) {
    throw ConfigError("STFT hop " + std::to_string(c.hop) + " leaves gaps for window length " +
                      std::to_string(c.window_length) + "; overlap-add cannot be normalized");
  }
  norm_floor_ = 0.1 * steady;
}

std::size_t Stft::num_frames(std::size_t length) const {
  if (length < config_.window_length) {
    throw DegenerateSignalError("input too short: " + std::to_string(length) +
                                " samples, need at least " +
                                std::to_string(config_.window_length));
  }
  return 1 + (length - config_.window_length) / config_.hop;
}

std::pair<std::size_t, std::size_t> Stft::interior(std::size_t length) const {
  const std::size_t frames = num_frames(length);
  // Every frame that could cover a sample in [begin, end) exists.
  const std::size_t begin = config_.window_length - 1;
  const std::size_t end = frames * config_.hop;
  return {std::min(begin, end), end};
}

ComplexSpectrogram Stft::analyze_complex(std::span<const double> samples) const {
  const std::size_t frames = num_frames(samples.size());
  ComplexSpectrogram out{frames, bins(), std::vector<std::complex<double>>(frames * bins())};
  RealFft fft(config_.fft_size);
  std::vector<double> frame(config_.window_length);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * config_.hop;
    for (std::size_t n = 0; n < config_.window_length; ++n) {
      frame[n] = samples[start + n] * window_[n];
    }
    fft.forward(frame, std::span(out.values).subspan(t * bins(), bins()));
  }
  return out;
}

SpectrogramPair Stft::analyze(std::span<const double> samples) const {
  const ComplexSpectrogram spec = analyze_complex(samples);
  SpectrogramPair out{Tensor({spec.frames, spec.bins}), Tensor({spec.frames, spec.bins}),
                      config_};
  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    out.mag[i] = std::abs(spec.values[i]);
    out.phase[i] = std::arg(spec.values[i]);
  }
  return out;
}

std::vector<double> Stft::overlap_norm(std::size_t frames, std::size_t out_length) const {
  std::vector<double> norm(out_length, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * config_.hop;
    for (std::size_t n = 0; n < config_.window_length && start + n < out_length; ++n) {
      norm[start + n] += window_[n] * window_[n];
    }
  }
  for (double& v : norm) v = v > 0.0 ? 1.0 / std::max(v, norm_floor_) : 0.0;
  return norm;
}

std::vector<double> Stft::synthesize(const Tensor& mag, const Tensor& phase,
                                     std::size_t out_length) const {
  if (!mag.same_shape(phase) || mag.cols() != bins()) {
    throw DimensionError("istft: magnitude " + mag.shape_string() + " and phase " +
                         phase.shape_string() + " must both be T x " + std::to_string(bins()));
  }
  const std::size_t frames = mag.rows();
  if ((frames - 1) * config_.hop + config_.window_length > out_length) {
    throw DimensionError("istft: " + std::to_string(frames) + " frames do not fit in " +
                         std::to_string(out_length) + " samples");
  }
  RealFft fft(config_.fft_size);
  std::vector<std::complex<double>> spec(bins());
  std::vector<double> frame(config_.fft_size);
  std::vector<double> out(out_length, 0.0);
  const double scale = 1.0 / double(config_.fft_size);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t f = 0; f < bins(); ++f) spec[f] = std::polar(mag(t, f), phase(t, f));
    // The inverse real transform only uses the real part at DC and Nyquist.
    spec.front().imag(0.0);
    spec.back().imag(0.0);
    fft.inverse(spec, frame);
    const std::size_t start = t * config_.hop;
    for (std::size_t n = 0; n < config_.window_length; ++n) {
      out[start + n] += window_[n] * frame[n] * scale;
    }
  }
  const auto norm = overlap_norm(frames, out_length);
  for (std::size_t n = 0; n < out_length; ++n) out[n] *= norm[n];
  return out;
}

Tensor Stft::synthesize_mag_adjoint(const Tensor& phase, std::span<const double> grad_wave) const {
  const std::size_t frames = phase.rows();
  const auto norm = overlap_norm(frames, grad_wave.size());
  RealFft fft(config_.fft_size);
  std::vector<double> frame(config_.window_length);
  std::vector<std::complex<double>> spec(bins());
  Tensor out(phase.shape());
  const double scale = 1.0 / double(config_.fft_size);
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * config_.hop;
    for (std::size_t n = 0; n < config_.window_length; ++n) {
      frame[n] = window_[n] * grad_wave[start + n] * norm[start + n];
    }
    fft.forward(frame, spec);
    for (std::size_t f = 0; f < bins(); ++f) {
      const double weight = (f == 0 || 2 * f == config_.fft_size) ? scale : 2.0 * scale;
      const std::complex<double> rot = std::polar(1.0, phase(t, f));
      out(t, f) = weight * (rot * std::conj(spec[f])).real();
    }
  }
  return out;
}

SpectrogramPair stft_analyze(const Waveform& wave, const StftConfig& config) {
  if (wave.num_channels() != 1) {
    throw DimensionError("stft_analyze expects mono input; split channels first");
  }
  return Stft(config).analyze(wave.channel(0));
}

Waveform istft_synthesize(const Tensor& mag, const Tensor& phase, const StftConfig& config,
                          std::size_t out_length) {
  return Waveform::mono(Stft(config).synthesize(mag, phase, out_length));
}

Tensor apply_mask(const Tensor& m1, const Tensor& r) {
  if (!m1.same_shape(r)) {
    throw DimensionError("apply_mask: magnitude " + m1.shape_string() + " vs mask " +
                         r.shape_string());
  }
  Tensor out(m1.shape());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(r[i] >= 0.0 && r[i] <= 1.0)) {
      throw ContractError("apply_mask: mask value " + std::to_string(r[i]) + " at index " +
                          std::to_string(i) + " outside [0, 1]");
    }
    out[i] = m1[i] * r[i];
  }
  return out;
}

}  // namespace tss

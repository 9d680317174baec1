// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace tss {

// Real-input FFT of a fixed size backed by FFTW. The inverse is
// unnormalized (inverse(forward(x)) == n * x). Plan creation is not
// thread-safe; one instance per thread.
class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;

  std::size_t size() const { return n_; }
  std::size_t bins() const { return n_ / 2 + 1; }

  // `in` may be shorter than size(); it is zero-padded.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);
  std::vector<std::complex<double>> forward(std::span<const double> in);
  std::vector<double> inverse(std::span<const std::complex<double>> in);

 private:
  struct Plans;
  std::size_t n_ = 0;
  std::unique_ptr<Plans> plans_;
};

std::size_t next_pow2(std::size_t n);

// Full linear convolution (length a + b - 1) computed in the frequency domain.
std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b);

}  // namespace tss

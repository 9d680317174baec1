// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tss/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <cstring>

#include "tss/errors.h"

namespace tss {

struct RealFft::Plans {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  explicit Plans(std::size_t n) {
    real = fftw_alloc_real(n);
    spec = fftw_alloc_complex(n / 2 + 1);
    fwd = fftw_plan_dft_r2c_1d(int(n), real, spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(int(n), spec, real, FFTW_ESTIMATE);
    if (!real || !spec || !fwd || !inv) throw Error("FFTW plan creation failed");
  }
  ~Plans() {
    if (fwd) fftw_destroy_plan(fwd);
    if (inv) fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(spec);
  }
};

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n < 2) throw ConfigError("FFT size must be at least 2");
  plans_ = std::make_unique<Plans>(n);
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  if (in.size() > n_ || out.size() != bins()) throw DimensionError("RealFft::forward: bad sizes");
  std::copy(in.begin(), in.end(), plans_->real);
  std::fill(plans_->real + in.size(), plans_->real + n_, 0.0);
  fftw_execute(plans_->fwd);
  std::memcpy(static_cast<void*>(out.data()), plans_->spec, bins() * sizeof(fftw_complex));
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  if (in.size() != bins() || out.size() != n_) throw DimensionError("RealFft::inverse: bad sizes");
  std::memcpy(plans_->spec, static_cast<const void*>(in.data()), bins() * sizeof(fftw_complex));
  fftw_execute(plans_->inv);
  std::copy(plans_->real, plans_->real + n_, out.begin());
}

std::vector<std::complex<double>> RealFft::forward(std::span<const double> in) {
  std::vector<std::complex<double>> out(bins());
  forward(in, out);
  return out;
}

std::vector<double> RealFft::inverse(std::span<const std::complex<double>> in) {
  std::vector<double> out(n_);
  inverse(in, out);
  return out;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> fft_convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  RealFft fft(next_pow2(out_len));
  auto fa = fft.forward(a);
  const auto fb = fft.forward(b);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  auto full = fft.inverse(fa);
  full.resize(out_len);
  const double scale = 1.0 / double(fft.size());
  for (double& v : full) v *= scale;
  return full;
}

}  // namespace tss

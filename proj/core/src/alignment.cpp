// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tss/alignment.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "tss/errors.h"
#include "tss/fft.h"

namespace tss {
namespace {

bool all_zero(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; });
}

const Waveform& require_mono(const Waveform& w, const char* what) {
  if (w.num_channels() != 1) {
    throw DimensionError(std::string(what) + " must be mono for delay estimation");
  }
  return w;
}

}  // namespace

DelayEstimate gcc_phat_delay(std::span<const double> a, std::span<const double> b,
                             std::size_t max_lag) {
  if (a.size() < 2 * max_lag || b.size() < 2 * max_lag || a.empty() || b.empty()) {
    throw PreconditionError("gcc_phat_delay: signals of " + std::to_string(a.size()) + " and " +
                            std::to_string(b.size()) + " samples are shorter than 2 * max_lag (" +
                            std::to_string(2 * max_lag) + ")");
  }
  if (all_zero(a) || all_zero(b)) {
    throw DegenerateSignalError("gcc_phat_delay: input signal is all zeros");
  }
  RealFft fft(next_pow2(a.size() + b.size()));
  auto spec_a = fft.forward(a);
  const auto spec_b = fft.forward(b);
  for (std::size_t k = 0; k < spec_a.size(); ++k) {
    const std::complex<double> cross = std::conj(spec_a[k]) * spec_b[k];
    spec_a[k] = cross / std::max(std::abs(cross), 1e-12);
  }
  const auto corr = fft.inverse(spec_a);
  const long n = long(fft.size());
  const long limit = std::min<long>(long(max_lag), n / 2 - 1);
  DelayEstimate best{0, -std::numeric_limits<double>::infinity()};
  for (long lag = -limit; lag <= limit; ++lag) {
    const double v = corr[std::size_t(lag >= 0 ? lag : n + lag)];
    if (v > best.peak_strength) best = {lag, v};
  }
  best.peak_strength = std::clamp(best.peak_strength / double(n), 0.0, 1.0);
  return best;
}

DelayEstimate gcc_phat_delay(const Waveform& a, const Waveform& b, std::size_t max_lag) {
  return gcc_phat_delay(require_mono(a, "first signal").channel(0),
                        require_mono(b, "second signal").channel(0), max_lag);
}

std::vector<double> shift_signal(std::span<const double> x, long shift, std::size_t out_length) {
  std::vector<double> out(out_length, 0.0);
  for (std::size_t n = 0; n < out_length; ++n) {
    const long src = long(n) - shift;
    if (src >= 0 && src < long(x.size())) out[n] = x[std::size_t(src)];
  }
  return out;
}

Waveform apply_alignment(const Waveform& target, long lag, std::size_t out_length) {
  return Waveform::mono(shift_signal(require_mono(target, "target").channel(0), -lag, out_length));
}

AlignResult align_pair(const Waveform& target, const Waveform& mixture_ref, std::size_t max_lag) {
  const DelayEstimate est = gcc_phat_delay(mixture_ref, target, max_lag);
  AlignResult result;
  result.lag = est.lag;
  result.peak_strength = est.peak_strength;
  result.saturated = max_lag > 0 && std::size_t(std::labs(est.lag)) >= max_lag;
  result.aligned = apply_alignment(target, est.lag, mixture_ref.length());
  return result;
}

}  // namespace tss

// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tss/waveform.h"

namespace tss {

inline constexpr std::size_t kDefaultMaxLag = 1600;  // 100 ms at 16 kHz

struct DelayEstimate {
  long lag = 0;                // positive: the second signal lags the first
  double peak_strength = 0.0;  // normalized PHAT correlation peak in [0, 1]
};

// Generalized cross-correlation with phase-transform weighting. The search
// is restricted to |lag| <= max_lag; both signals need at least 2 * max_lag
// samples and nonzero energy.
DelayEstimate gcc_phat_delay(std::span<const double> a, std::span<const double> b,
                             std::size_t max_lag = kDefaultMaxLag);
DelayEstimate gcc_phat_delay(const Waveform& a, const Waveform& b,
                             std::size_t max_lag = kDefaultMaxLag);

// out[n] = x[n - shift], zero outside x, length out_length.
std::vector<double> shift_signal(std::span<const double> x, long shift, std::size_t out_length);

struct AlignResult {
  Waveform aligned;  // same length as the mixture reference
  long lag = 0;      // delay of the target relative to the mixture before alignment
  double peak_strength = 0.0;
  bool saturated = false;  // |lag| hit max_lag; the estimate may be clipped
};

// Shifts `target` by -lag so it lines up with `mixture_ref` (mono; for
// dual-channel mixtures pass channel 1).
AlignResult align_pair(const Waveform& target, const Waveform& mixture_ref,
                       std::size_t max_lag = kDefaultMaxLag);
// Applies a previously measured lag.
Waveform apply_alignment(const Waveform& target, long lag, std::size_t out_length);

}  // namespace tss

// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <span>
#include <vector>

#include "tss/tape.h"

namespace tss {

inline constexpr double kMetricEps = 1e-8;
inline constexpr double kMetricClampDb = 60.0;

struct SiSnrOptions {
  bool zero_mean = true;
  // Residual e = est - ref instead of est - projection. Not scale invariant.
  bool literal_residual = false;
  // Scaled by the estimate energy: residual energy + eps * |est|^2.
  double eps = kMetricEps;
};

// Clamped to at most +60 dB. Silent estimates give a large negative finite value.
double si_snr(std::span<const double> est, std::span<const double> ref,
              const SiSnrOptions& options = {});
double sdr(std::span<const double> est, std::span<const double> ref, double eps = kMetricEps);
// sdr(est, ref) - sdr(mix_ref, ref).
double sdr_improvement(std::span<const double> mix_ref, std::span<const double> est,
                       std::span<const double> ref, double eps = kMetricEps);

// Unclamped negative SI-SNR of a taped estimate against a detached reference.
Value neg_si_snr(Tape& tape, Value est, std::span<const double> ref,
                 const SiSnrOptions& options = {});
// Mean of neg_si_snr over a batch.
Value si_snr_loss(Tape& tape, std::span<const Value> estimates,
                  const std::vector<std::vector<double>>& references,
                  const SiSnrOptions& options = {});

}  // namespace tss

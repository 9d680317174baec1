// Copyright 2026 The tss Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tss/metrics.h"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <string>

#include "tss/errors.h"
#include "tss/ops.h"

namespace tss {
namespace {

constexpr double kDbPerNeper = 10.0 / M_LN10;

void check_pair(std::size_t est, std::size_t ref) {
  if (est != ref) {
    throw DimensionError("estimate and reference lengths differ: " + std::to_string(est) +
                         " vs " + std::to_string(ref));
  }
  if (ref == 0) throw DegenerateSignalError("empty signals");
}

std::vector<double> centered(std::span<const double> x, bool zero_mean) {
  std::vector<double> out(x.begin(), x.end());
  if (!zero_mean) return out;
  double mean = 0.0;
  for (double v : out) mean += v;
  mean /= double(out.size());
  for (double& v : out) v -= mean;
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct SiSnrParts {
  std::vector<double> est;  // centered estimate
  std::vector<double> ref;  // centered reference
  std::vector<double> target;
  std::vector<double> noise;
  double target_energy = 0.0;
  double noise_energy = 0.0;
  double floor = 0.0;  // eps scaled by the estimate energy
  double db = 0.0;     // unclamped
};

SiSnrParts si_snr_parts(std::span<const double> est, std::span<const double> ref,
                        const SiSnrOptions& o) {
  check_pair(est.size(), ref.size());
  SiSnrParts p;
  p.est = centered(est, o.zero_mean);
  p.ref = centered(ref, o.zero_mean);
  const double ref_energy = dot(p.ref, p.ref);
  if (!(ref_energy > 0.0)) throw DegenerateSignalError("degenerate reference: zero energy");
  const double alpha = dot(p.est, p.ref) / ref_energy;
  const std::size_t n = p.est.size();
  p.target.resize(n);
  p.noise.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.target[i] = alpha * p.ref[i];
    p.noise[i] = p.est[i] - (o.literal_residual ? p.ref[i] : p.target[i]);
  }
  p.target_energy = dot(p.target, p.target);
  p.noise_energy = dot(p.noise, p.noise);
  // A fixed eps would break the scale invariance for quiet estimates.
  p.floor = o.eps * dot(p.est, p.est);
  const double denom = p.noise_energy + p.floor;
  // A silent estimate has no residual either; report it as DBL_MIN over 1.
  p.db = kDbPerNeper * std::log(std::max(p.target_energy, DBL_MIN) / (denom > 0.0 ? denom : 1.0));
  return p;
}

}  // namespace

double si_snr(std::span<const double> est, std::span<const double> ref,
              const SiSnrOptions& options) {
  return std::min(si_snr_parts(est, ref, options).db, kMetricClampDb);
}

double sdr(std::span<const double> est, std::span<const double> ref, double eps) {
  check_pair(est.size(), ref.size());
  const double ref_energy = dot(ref, ref);
  if (!(ref_energy > 0.0)) throw DegenerateSignalError("degenerate reference: zero energy");
  double err = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) err += (ref[i] - est[i]) * (ref[i] - est[i]);
  return std::min(kDbPerNeper * std::log(ref_energy / (err + eps)), kMetricClampDb);
}

double sdr_improvement(std::span<const double> mix_ref, std::span<const double> est,
                       std::span<const double> ref, double eps) {
  return sdr(est, ref, eps) - sdr(mix_ref, ref, eps);
}

Value neg_si_snr(Tape& tape, Value est, std::span<const double> ref,
                 const SiSnrOptions& options) {
  SiSnrParts p = si_snr_parts(tape.value(est).values(), ref, options);
  const double db = p.db;
  return tape.record(
      Tensor::scalar(-db), {est}, [est, p = std::move(p), options](Tape& t, const Tensor& g) {
        const std::size_t n = p.est.size();
        const double scale = -g[0] * kDbPerNeper;
        const double wt = p.target_energy > DBL_MIN ? 2.0 / p.target_energy : 0.0;
        const double denom = p.noise_energy + p.floor;
        const double wn = denom > 0.0 ? 2.0 / denom : 0.0;
        const double eps = options.eps;
        // d(target energy)/d est = 2 target; d(noise energy)/d est = 2 noise
        // for both residual definitions.
        std::vector<double> d(n);
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          d[i] = scale * (wt * p.target[i] - wn * (p.noise[i] + eps * p.est[i]));
          mean += d[i];
        }
        mean /= double(n);
        Tensor& ge = t.grad(est);
        for (std::size_t i = 0; i < n; ++i) ge[i] += options.zero_mean ? d[i] - mean : d[i];
      });
}

Value si_snr_loss(Tape& tape, std::span<const Value> estimates,
                  const std::vector<std::vector<double>>& references,
                  const SiSnrOptions& options) {
  if (estimates.empty() || estimates.size() != references.size()) {
    throw PreconditionError("si_snr_loss needs matching, non-empty estimate and reference lists");
  }
  std::vector<Value> terms;
  terms.reserve(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    terms.push_back(neg_si_snr(tape, estimates[i], references[i], options));
  }
  return mean_of(tape, terms);
}

}  // namespace tss

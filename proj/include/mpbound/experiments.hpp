/*
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpbound/bounds.hpp"
#include "mpbound/config.hpp"
#include "mpbound/edf.hpp"
#include "mpbound/errors.hpp"
#include "mpbound/format.hpp"
#include "mpbound/kernels.hpp"
#include "mpbound/parallel.hpp"
#include "mpbound/rng.hpp"

// Seeded Monte Carlo experiments comparing realized forward errors with the
// deterministic (DBEA) and probabilistic (VIBEA) bounds.
namespace mpbound {

enum class MacVariant { no_fma, fma, mpfma };

inline std::string_view to_string(MacVariant v) noexcept {
  switch (v) {
    case MacVariant::no_fma: return "no_fma";
    case MacVariant::fma: return "fma";
    default: return "mpfma";
  }
}

inline MacVariant parse_mac_variant(std::string_view s) {
  if (s == "no_fma" || s == "no-fma") return MacVariant::no_fma;
  if (s == "fma") return MacVariant::fma;
  if (s == "mpfma") return MacVariant::mpfma;
  throw FormatError("unknown MAC variant '" + std::string(s) + "'");
}

enum RecordFlag : std::uint8_t {
  kZeroReference = 1u << 0,
  kRangeError = 1u << 1,
};

struct TrialRecord {
  std::uint64_t trial = 0;
  std::size_t row = 0;  // GEMM element position; 0 for MAC
  std::size_t col = 0;
  double err_true = 0.0;
  double bound_dbea = 0.0;
  double bound_vibea = 0.0;
  double prob_vibea = 0.0;  // clamped
  std::uint8_t flags = 0;

  bool flagged() const noexcept { return flags != 0; }
};

/// Storage format of every sampled experiment input.
inline FloatFormat experiment_storage() { return fp32(); }

/// RNG stream ids; fixed so all MAC variants see the same a, b, c per trial.
enum class Stream : std::uint64_t { mac_a = 0, mac_b = 1, mac_c = 2, gemm_a = 3, gemm_b = 4 };

namespace detail {

/// Draws lo + (hi - lo) U[0,1) and rounds it into `storage`, redrawing while
/// the stored magnitude is below `min_abs`.
inline double sample_stored(const CounterRng& rng, std::uint64_t index, double lo, double hi,
                            const FloatFormat& storage, double min_abs) {
  for (std::uint64_t attempt = 0; attempt < 1024; ++attempt) {
    const double x = lo + (hi - lo) * rng.uniform01((attempt << 40) | index);
    const double v = round_value(x, storage).value;
    if (std::fabs(v) >= min_abs) return v;
  }
  throw IterationError("sampling: could not draw a value above the minimum magnitude");
}

inline TrialRecord range_error_record(std::uint64_t trial) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {trial, 0, 0, nan, nan, nan, 0.0, kRangeError};
}

}  // namespace detail

/// lambda for "auto:<target>" on a MAC run: the lambda whose single-product
/// probability reaches `target` (u of the storage format for no_fma/fma,
/// u_low for mpfma, n = 2).
inline double auto_lambda_mac(MacVariant v, double target, const TensorCoreConfig& cfg) {
  const double u = v == MacVariant::mpfma ? cfg.u_low() : unit_roundoff(experiment_storage());
  return lambda_for_probability(target, u, 2);
}

/// lambda for "auto:<target>" on a GEMM run: inverts the whole-matrix union bound.
inline double auto_lambda_gemm(const GemmShape& shape, double target, const TensorCoreConfig& cfg) {
  validate(shape);
  return lambda_for_tc_probability(target, shape.m, shape.t_out, shape.inner, shape.b, cfg);
}

/// d = a*b + c with a, b, c ~ U[1, 2] stored in fp32, evaluated three ways:
///  - no_fma: two fp32 roundings; bound from the derived two-rounding coefficients
///  - fma:    one fp32 rounding; DBEA = VIBEA = u (|ab| + |c|) / |ab + c|, always valid
///  - mpfma:  a, b rounded to cfg.low, then MPFMA; representation-error bounds,
///            VIBEA valid with probability p_b(lambda, u_low, 2)
/// Truth is the binary64 a*b + c of the stored operands.
inline std::vector<TrialRecord> mac_experiment(MacVariant variant, std::uint64_t trials, std::uint64_t seed,
                                               double lambda, const TensorCoreConfig& cfg, ExecPolicy policy = {}) {
  if (trials == 0) throw DomainError("mac_experiment needs at least one trial");
  validate(cfg);
  const FloatFormat storage = experiment_storage();
  const double u = unit_roundoff(storage);

  CoefPair det, prob;
  double probability = 1.0;
  switch (variant) {
    case MacVariant::no_fma:
      det = mac_no_fma_coefs(u, Analysis::deterministic);
      prob = mac_no_fma_coefs(u, Analysis::probabilistic, lambda);
      probability = prob_bound(lambda, u, 2);
      break;
    case MacVariant::fma:
      det = prob = fma_coefs(u);
      break;
    case MacVariant::mpfma:
      det = mpfma_repr_coefs(cfg, Analysis::deterministic);
      prob = mpfma_repr_coefs(cfg, Analysis::probabilistic, lambda);
      probability = prob_bound(lambda, cfg.u_low(), 2);
      break;
  }
  const double prob_clamped = clamp_probability(probability);

  std::vector<TrialRecord> out(trials);
  parallel_for(trials, policy, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const CounterRng ra(seed, static_cast<std::uint64_t>(Stream::mac_a), t);
      const CounterRng rb(seed, static_cast<std::uint64_t>(Stream::mac_b), t);
      const CounterRng rc(seed, static_cast<std::uint64_t>(Stream::mac_c), t);
      const double a = detail::sample_stored(ra, 0, 1.0, 2.0, storage, 0.0);
      const double b = detail::sample_stored(rb, 0, 1.0, 2.0, storage, 0.0);
      const double c = detail::sample_stored(rc, 0, 1.0, 2.0, storage, 0.0);

      double computed;
      try {
        switch (variant) {
          case MacVariant::no_fma: computed = mac_no_fma(a, b, c, storage).value; break;
          case MacVariant::fma: computed = fma(a, b, c, storage).value; break;
          default: computed = mpfma_with_repr(a, b, c, cfg).value; break;
        }
      } catch (const RangeError&) {
        out[t] = detail::range_error_record(t);
        continue;
      }

      const double truth = std::fma(a, b, c);
      TrialRecord rec;
      rec.trial = t;
      rec.prob_vibea = prob_clamped;
      if (truth == 0.0) {
        rec.flags = kZeroReference;
        rec.err_true = rec.bound_dbea = rec.bound_vibea = std::numeric_limits<double>::quiet_NaN();
      } else {
        const double abs_ab = std::fabs(a * b), abs_c = std::fabs(c), abs_d = std::fabs(truth);
        rec.err_true = std::fabs(computed - truth) / abs_d;
        rec.bound_dbea = instance_bound(det, abs_ab, abs_c, abs_d);
        rec.bound_vibea = instance_bound(prob, abs_ab, abs_c, abs_d);
      }
      out[t] = rec;
    }
  });
  return out;
}

/// D = A B with A, B ~ U(-1, 1) stored in fp32 (magnitudes below the normal
/// range of cfg.low are redrawn), computed by tc_gemm_checked and compared
/// with the binary64 product. One record per output element per trial, with
/// instance bounds coef * (|A||B|)_ij / |AB|_ij.
inline std::vector<TrialRecord> gemm_experiment(const GemmShape& shape, std::uint64_t trials, std::uint64_t seed,
                                                double lambda, const TensorCoreConfig& cfg, ExecPolicy policy = {}) {
  if (trials == 0) throw DomainError("gemm_experiment needs at least one trial");
  validate(shape);
  validate(cfg);
  const FloatFormat storage = experiment_storage();
  const double min_abs = range_limits(cfg.low).min_normal;

  const double coef_det = tc_repr_coef(shape.inner, shape.q(), cfg, Analysis::deterministic);
  const double coef_prob = tc_repr_coef(shape.inner, shape.q(), cfg, Analysis::probabilistic, lambda);
  const double probability =
      tc_probability(shape.m, shape.t_out, shape.inner, shape.b, shape.q(), cfg, lambda).clamped;

  const std::size_t elems = shape.m * shape.t_out;
  std::vector<TrialRecord> out;
  out.reserve(elems * trials);
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    Matrix a(shape.m, shape.inner), b(shape.inner, shape.t_out);
    const CounterRng ra(seed, static_cast<std::uint64_t>(Stream::gemm_a), trial);
    const CounterRng rb(seed, static_cast<std::uint64_t>(Stream::gemm_b), trial);
    parallel_for(a.size(), policy, [&](std::size_t begin, std::size_t end) {
      for (std::size_t e = begin; e < end; ++e) a.data()[e] = detail::sample_stored(ra, e, -1.0, 1.0, storage, min_abs);
    });
    parallel_for(b.size(), policy, [&](std::size_t begin, std::size_t end) {
      for (std::size_t e = begin; e < end; ++e) b.data()[e] = detail::sample_stored(rb, e, -1.0, 1.0, storage, min_abs);
    });

    const TcGemmResult emu = tc_gemm_checked(a, b, shape, cfg, policy);
    const Matrix ref = gemm_reference(a, b);
    const Matrix abs_ref = gemm_reference(elementwise_abs(a), elementwise_abs(b));

    for (std::size_t e = 0; e < elems; ++e) {
      TrialRecord rec;
      rec.trial = trial;
      rec.row = e / shape.t_out;
      rec.col = e % shape.t_out;
      rec.prob_vibea = probability;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      if (emu.faults[e] != RangeFault::none) {
        rec.flags = kRangeError;
        rec.err_true = rec.bound_dbea = rec.bound_vibea = nan;
      } else if (ref.data()[e] == 0.0) {
        rec.flags = kZeroReference;
        rec.err_true = rec.bound_dbea = rec.bound_vibea = nan;
      } else {
        const double d = std::fabs(ref.data()[e]);
        const double ratio = abs_ref.data()[e] / d;
        rec.err_true = std::fabs(emu.d.data()[e] - ref.data()[e]) / d;
        rec.bound_dbea = coef_det * ratio;
        rec.bound_vibea = coef_prob * ratio;
      }
      out.push_back(rec);
    }
  }
  return out;
}

struct CoverageSummary {
  std::size_t n = 0;        // all records
  std::size_t flagged = 0;  // excluded from everything below
  double max_err = 0.0;
  double max_dbea = 0.0;
  double max_vibea = 0.0;
  double frac_within_dbea = 1.0;
  double frac_within_vibea = 1.0;
  double min_prob_vibea = 1.0;
};

inline CoverageSummary coverage_summary(std::span<const TrialRecord> records) {
  if (records.empty()) throw EmptyInput("coverage_summary needs at least one record");
  CoverageSummary s;
  s.n = records.size();
  std::size_t within_dbea = 0, within_vibea = 0, used = 0;
  for (const TrialRecord& r : records) {
    if (r.flagged()) {
      ++s.flagged;
      continue;
    }
    ++used;
    s.max_err = std::max(s.max_err, r.err_true);
    s.max_dbea = std::max(s.max_dbea, r.bound_dbea);
    s.max_vibea = std::max(s.max_vibea, r.bound_vibea);
    s.min_prob_vibea = std::min(s.min_prob_vibea, r.prob_vibea);
    within_dbea += r.err_true <= r.bound_dbea;
    within_vibea += r.err_true <= r.bound_vibea;
  }
  if (used > 0) {
    s.frac_within_dbea = static_cast<double>(within_dbea) / static_cast<double>(used);
    s.frac_within_vibea = static_cast<double>(within_vibea) / static_cast<double>(used);
  }
  return s;
}

/// err_true of the unflagged records.
inline std::vector<double> unflagged_errors(std::span<const TrialRecord> records) {
  std::vector<double> v;
  v.reserve(records.size());
  for (const TrialRecord& r : records)
    if (!r.flagged()) v.push_back(r.err_true);
  return v;
}

}  // namespace mpbound

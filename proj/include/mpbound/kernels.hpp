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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mpbound/config.hpp"
#include "mpbound/detail/eft.hpp"
#include "mpbound/errors.hpp"
#include "mpbound/format.hpp"
#include "mpbound/matrix.hpp"
#include "mpbound/parallel.hpp"

// Bit-exact emulation of multiply-accumulate kernels. Every intermediate is
// carried as an exact binary64 (or an exact hi + lo pair from two_sum) and
// rounded once per modeled rounding event, so results do not depend on double
// rounding through binary64.
namespace mpbound {

/// Counts of rounding events performed by a tensor-core kernel call.
struct KernelTrace {
  std::size_t acc_roundings = 0;
  std::size_t out_roundings = 0;
};

namespace detail {

inline void require_operand(double x, const FloatFormat& f, const char* what) {
  if (!is_representable(x, f)) throw ExactnessError(std::string(what) + " is not representable in " + to_string(f));
}

/// Product of two values with at most 25 significant bits: exact in binary64.
inline double exact_product(double a, double b) noexcept { return a * b; }

/// Relative error of `value` against the exact hi + lo; +inf when the exact
/// result is zero but the value is not.
inline double relative_error(double value, DoubleSum exact) noexcept {
  if (exact.hi == 0.0) return value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return ((value - exact.hi) - exact.lo) / exact.hi;
}

inline RoundedValue composite_result(double value, DoubleSum exact) noexcept {
  return {value, !(value == exact.hi && exact.lo == 0.0), relative_error(value, exact)};
}

inline void throw_if_fault(const RoundOutcome& o, const char* where) {
  if (o.fault != RangeFault::none) throw RangeError(o.fault, where);
}

enum class StepStatus : std::uint8_t { ok, overflow, underflow, inexact_product };

inline StepStatus to_status(RangeFault f) noexcept {
  return f == RangeFault::overflow ? StepStatus::overflow : StepStatus::underflow;
}

/// One call of the tensor-core kernel z <- fl_out(z + sum_j x_j y_j) with
/// left-to-right accumulation rounded to `acc`. y is read with `y_stride`.
/// Inputs are assumed already valid in their formats.
inline StepStatus block_step(double& z, const double* x, const double* y, std::size_t b, std::size_t y_stride,
                             const TensorCoreConfig& cfg, bool first_block, KernelTrace* trace) noexcept {
  double s = z;
  for (std::size_t j = 0; j < b; ++j) {
    const double p = exact_product(x[j], y[j * y_stride]);
    const RoundOutcome pm = round_value(p, cfg.mul);
    if (pm.fault != RangeFault::none) return to_status(pm.fault);
    if (pm.inexact) return StepStatus::inexact_product;

    if (first_block && j == 0 && s == 0.0) {
      s = p;  // adding to zero is exact
      continue;
    }
    const DoubleSum sum = two_sum(s, p);
    const RoundOutcome r = round_sum(sum.hi, sum.lo, cfg.acc);
    if (r.fault != RangeFault::none) return to_status(r.fault);
    if (trace) ++trace->acc_roundings;
    s = r.value;
  }
  const RoundOutcome out = round_value(s, cfg.out);
  if (out.fault != RangeFault::none) return to_status(out.fault);
  if (trace) ++trace->out_roundings;
  z = out.value;
  return StepStatus::ok;
}

}  // namespace detail

/// fl(fl(a*b) + c): multiply and add as two separately rounded operations.
inline RoundedValue mac_no_fma(double a, double b, double c, const FloatFormat& fmt) {
  require_emulable(fmt);
  detail::require_operand(a, fmt, "a");
  detail::require_operand(b, fmt, "b");
  detail::require_operand(c, fmt, "c");
  const double p = detail::exact_product(a, b);
  const auto prod = detail::round_value(p, fmt);
  detail::throw_if_fault(prod, "mac_no_fma: product");
  const auto sum = detail::two_sum(prod.value, c);
  const auto res = detail::round_sum(sum.hi, sum.lo, fmt);
  detail::throw_if_fault(res, "mac_no_fma: sum");
  return detail::composite_result(res.value, detail::two_sum(p, c));
}

/// fl(a*b + c) with a single rounding of the exact result.
inline RoundedValue fma(double a, double b, double c, const FloatFormat& fmt) {
  require_emulable(fmt);
  detail::require_operand(a, fmt, "a");
  detail::require_operand(b, fmt, "b");
  detail::require_operand(c, fmt, "c");
  const auto sum = detail::two_sum(detail::exact_product(a, b), c);
  return detail::to_rounded(detail::round_sum(sum.hi, sum.lo, fmt), "fma: result out of range");
}

/// Mixed-precision FMA: a, b in cfg.low, c in cfg.high; exact product in
/// cfg.mul, accumulation rounded to cfg.acc, result rounded to cfg.out.
inline RoundedValue mpfma(double a, double b, double c, const TensorCoreConfig& cfg) {
  validate(cfg);
  detail::require_operand(a, cfg.low, "a");
  detail::require_operand(b, cfg.low, "b");
  detail::require_operand(c, cfg.high, "c");
  const double p = detail::exact_product(a, b);
  const auto pm = detail::round_value(p, cfg.mul);
  detail::throw_if_fault(pm, "mpfma: product");
  if (pm.inexact) throw ExactnessError("mpfma: product is not exact in the product format");

  const auto exact = detail::two_sum(p, c);
  const auto s = detail::round_sum(exact.hi, exact.lo, cfg.acc);
  detail::throw_if_fault(s, "mpfma: accumulation");
  const auto out = detail::round_value(s.value, cfg.out);
  detail::throw_if_fault(out, "mpfma: output");
  return detail::composite_result(out.value, exact);
}

/// MPFMA on values held in a wider storage format: a and b are first rounded
/// to cfg.low and c to cfg.high. `delta` is measured against the exact a*b + c
/// of the original operands.
inline RoundedValue mpfma_with_repr(double a, double b, double c, const TensorCoreConfig& cfg) {
  validate(cfg);
  for (double v : {a, b, c}) detail::require_finite(v);
  const auto al = detail::round_value(a, cfg.low);
  const auto bl = detail::round_value(b, cfg.low);
  const auto ch = detail::round_value(c, cfg.high);
  detail::throw_if_fault(al, "mpfma_with_repr: a");
  detail::throw_if_fault(bl, "mpfma_with_repr: b");
  detail::throw_if_fault(ch, "mpfma_with_repr: c");
  const RoundedValue r = mpfma(al.value, bl.value, ch.value, cfg);

  // a*b may need more than 53 bits when the storage format is wide.
  const double p = a * b;
  const double p_err = std::fma(a, b, -p);
  const auto hi = detail::two_sum(p, c);
  const auto exact = detail::two_sum(hi.hi, hi.lo + p_err);
  return detail::composite_result(r.value, exact);
}

/// One tensor-core kernel call: z_prev + x.y with exact products, left-to-right
/// accumulation rounded to cfg.acc, then one rounding to cfg.out. With
/// first_block set and z_prev == 0 the first accumulation is exact.
inline RoundedValue tc_block_kernel(double z_prev, std::span<const double> x, std::span<const double> y,
                                    const TensorCoreConfig& cfg, bool first_block, KernelTrace* trace = nullptr) {
  validate(cfg);
  if (x.size() != y.size() || x.empty()) throw ShapeError("tc_block_kernel: x and y need the same nonzero length");
  detail::require_operand(z_prev, cfg.out, "z_prev");
  for (double v : x) detail::require_operand(v, cfg.low, "x");
  for (double v : y) detail::require_operand(v, cfg.low, "y");

  double z = z_prev;
  switch (detail::block_step(z, x.data(), y.data(), x.size(), 1, cfg, first_block, trace)) {
    case detail::StepStatus::overflow: throw RangeError(RangeFault::overflow, "tc_block_kernel");
    case detail::StepStatus::underflow: throw RangeError(RangeFault::underflow, "tc_block_kernel");
    case detail::StepStatus::inexact_product:
      throw ExactnessError("tc_block_kernel: product is not exact in the product format");
    case detail::StepStatus::ok: break;
  }

  detail::ExactSum exact;
  exact.add(z_prev);
  for (std::size_t j = 0; j < x.size(); ++j) exact.add(x[j] * y[j]);
  const double ref = exact.approx();
  if (exact.is_zero()) return {z, z != 0.0, z == 0.0 ? 0.0 : std::numeric_limits<double>::infinity()};
  exact.add(-z);
  return {z, !exact.is_zero(), -exact.approx() / ref};
}

struct TcGemmResult {
  Matrix d;                        // NaN where a range fault occurred
  std::vector<RangeFault> faults;  // row-major, one per element of d
  std::size_t fault_count = 0;
};

/// Blocked tensor-core GEMM. A and B are rounded to cfg.low, then each
/// b1 x b2 output tile is updated with D_ij <- fl_out(D_ij + A_ik B_kj) for
/// k = 1..q. Range faults are reported per output element instead of thrown.
inline TcGemmResult tc_gemm_checked(const Matrix& a, const Matrix& b, const GemmShape& shape,
                                    const TensorCoreConfig& cfg, ExecPolicy policy = {}) {
  validate(shape);
  validate(cfg);
  if (a.rows() != shape.m || a.cols() != shape.inner || b.rows() != shape.inner || b.cols() != shape.t_out)
    throw ShapeError("tc_gemm: matrix dimensions do not match the shape");

  const std::size_t m = shape.m, n = shape.inner, t = shape.t_out;
  Matrix al(m, n);
  Matrix blt(t, n);  // transposed so each output column's inputs are contiguous
  std::vector<RangeFault> row_fault(m, RangeFault::none), col_fault(t, RangeFault::none);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      detail::require_finite(a(i, k));
      const auto o = detail::round_value(a(i, k), cfg.low);
      if (o.fault != RangeFault::none) row_fault[i] = o.fault;
      al(i, k) = o.value;
    }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < t; ++j) {
      detail::require_finite(b(k, j));
      const auto o = detail::round_value(b(k, j), cfg.low);
      if (o.fault != RangeFault::none) col_fault[j] = o.fault;
      blt(j, k) = o.value;
    }

  TcGemmResult res{Matrix(m, t), std::vector<RangeFault>(m * t, RangeFault::none), 0};
  const std::size_t tiles_r = shape.r();
  parallel_for(shape.p() * tiles_r, policy, [&](std::size_t begin, std::size_t end) {
    for (std::size_t tile = begin; tile < end; ++tile) {
      const std::size_t i0 = (tile / tiles_r) * shape.b1;
      const std::size_t j0 = (tile % tiles_r) * shape.b2;
      for (std::size_t i = i0; i < i0 + shape.b1; ++i)
        for (std::size_t j = j0; j < j0 + shape.b2; ++j) {
          RangeFault f = row_fault[i] != RangeFault::none ? row_fault[i] : col_fault[j];
          res.faults[i * t + j] = f;
        }
      for (std::size_t k = 0; k < shape.q(); ++k) {
        for (std::size_t i = i0; i < i0 + shape.b1; ++i) {
          for (std::size_t j = j0; j < j0 + shape.b2; ++j) {
            RangeFault& fault = res.faults[i * t + j];
            if (fault != RangeFault::none) continue;
            double& z = res.d(i, j);
            switch (detail::block_step(z, &al(i, k * shape.b), &blt(j, k * shape.b), shape.b, 1, cfg, k == 0,
                                       nullptr)) {
              case detail::StepStatus::ok: break;
              case detail::StepStatus::overflow: fault = RangeFault::overflow; break;
              case detail::StepStatus::underflow: fault = RangeFault::underflow; break;
              case detail::StepStatus::inexact_product:
                throw ExactnessError("tc_gemm: product is not exact in the product format");
            }
          }
        }
      }
    }
  });
  for (std::size_t e = 0; e < res.faults.size(); ++e) {
    if (res.faults[e] != RangeFault::none) {
      res.d.data()[e] = std::numeric_limits<double>::quiet_NaN();
      ++res.fault_count;
    }
  }
  return res;
}

/// As tc_gemm_checked, but any range fault raises RangeError.
inline Matrix tc_gemm(const Matrix& a, const Matrix& b, const GemmShape& shape, const TensorCoreConfig& cfg,
                      ExecPolicy policy = {}) {
  TcGemmResult r = tc_gemm_checked(a, b, shape, cfg, policy);
  for (RangeFault f : r.faults)
    if (f != RangeFault::none) throw RangeError(f, "tc_gemm: an element left the normal range");
  return std::move(r.d);
}

/// Plain binary64 product with ascending inner index; the experiments' truth.
inline Matrix gemm_reference(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("gemm_reference: inner dimensions differ");
  Matrix d(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) d(i, j) += aik * b(k, j);
    }
  return d;
}

inline Matrix elementwise_abs(const Matrix& a) {
  Matrix r = a;
  for (double& v : r.data()) v = std::fabs(v);
  return r;
}

struct ForwardErrors {
  std::vector<double> values;                // |c_hat - c| / |c|, NaN where flagged
  std::vector<std::uint8_t> zero_reference;  // 1 where c == 0
  std::size_t zero_count = 0;
};

inline ForwardErrors forward_error(std::span<const double> computed, std::span<const double> reference) {
  if (computed.size() != reference.size()) throw ShapeError("forward_error: sizes differ");
  ForwardErrors fe{std::vector<double>(computed.size()), std::vector<std::uint8_t>(computed.size(), 0), 0};
  for (std::size_t e = 0; e < computed.size(); ++e) {
    if (reference[e] == 0.0) {
      fe.values[e] = std::numeric_limits<double>::quiet_NaN();
      fe.zero_reference[e] = 1;
      ++fe.zero_count;
    } else {
      fe.values[e] = std::fabs(computed[e] - reference[e]) / std::fabs(reference[e]);
    }
  }
  return fe;
}

inline ForwardErrors forward_error(const Matrix& computed, const Matrix& reference) {
  if (computed.rows() != reference.rows() || computed.cols() != reference.cols())
    throw ShapeError("forward_error: shapes differ");
  return forward_error(std::span<const double>(computed.data()), std::span<const double>(reference.data()));
}

}  // namespace mpbound

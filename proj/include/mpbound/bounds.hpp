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
#include <cstdint>
#include <string>

#include "mpbound/config.hpp"
#include "mpbound/errors.hpp"

// Deterministic (worst-case) and variance-informed probabilistic bound
// constants, plus per-kernel forward error coefficients.
//
// Everything is evaluated in long double and rounded once on return, which
// keeps the constants within about an ulp of their exact values.
namespace mpbound {

enum class Analysis { deterministic, probabilistic };

/// Coefficients of a relative forward error bound of the form
///   (coef_ab * |a||b| + coef_c * |c|) / |a*b + c|.
/// For matrix bounds only coef_ab is used, multiplying |A||B| / |AB|.
struct CoefPair {
  double coef_ab = 0.0;
  double coef_c = 0.0;
};

struct BoundReport {
  double deterministic_bound = 0.0;
  double probabilistic_bound = 0.0;
  double lambda = 0.0;
  double probability = 0.0;  // raw, may be negative
  double probability_clamped = 0.0;
};

struct Probability {
  double raw = 0.0;
  double clamped = 0.0;
};

inline double clamp_probability(double p) noexcept { return std::clamp(p, 0.0, 1.0); }

inline BoundReport make_report(double det, double prob, double lambda, double probability) {
  return {det, prob, lambda, probability, clamp_probability(probability)};
}

/// Evaluates a coefficient pair on one instance.
inline double instance_bound(const CoefPair& k, double abs_ab, double abs_c, double abs_result) noexcept {
  return (k.coef_ab * abs_ab + k.coef_c * abs_c) / abs_result;
}

namespace detail {

using ext = long double;

inline void check_unit_roundoff(double u) {
  if (!(u >= 0.0 && u < 1.0)) throw DomainError("unit roundoff must lie in [0, 1)");
}

inline ext gamma_ext(std::uint64_t n, double u) {
  check_unit_roundoff(u);
  const ext nu = static_cast<ext>(n) * u;
  if (nu >= 1) throw DomainError("gamma_n undefined: n*u = " + std::to_string(static_cast<double>(nu)) + " >= 1");
  return nu / (1 - nu);
}

inline ext gamma_tilde_ext(std::uint64_t n, double u, double lambda) {
  return std::expm1(static_cast<ext>(lambda) * std::sqrt(static_cast<ext>(n)) * u);
}

/// Var[log(1 + d)] for d ~ U[-u, u]. Equal to
///   (4u^2 + (u^2 - 1)(log(1-u)^2 - 2 log(1-u) log(1+u) + log(1+u)^2)) / (4u^2),
/// rewritten as u^2 (1/3 - 2T + 2u^2 S + (u^4 - u^2) S^2) with
/// S = sum_{k>=1} u^(2k-2)/(2k+1) and T = S - 1/3, which does not cancel
/// for small u.
inline ext log_rounding_variance(double u_in) {
  const ext u = u_in;
  if (u == 0) return 0;
  const ext u2 = u * u;
  if (u > 0.5L) {
    const ext a = std::atanh(u) / u;
    return 1 - (1 - u2) * a * a;
  }
  ext tail = 0;  // T
  ext power = u2;
  for (int k = 2; k < 400; ++k) {
    const ext term = power / (2 * k + 1);
    tail += term;
    if (term < tail * 1e-21L) break;
    power *= u2;
  }
  const ext s = tail + 1.0L / 3;
  return u2 * ((1.0L / 3 - 2 * tail) + 2 * u2 * s + (u2 * u2 - u2) * s * s);
}

/// 1 - p_b(lambda, u, n), given var = Var[log(1 + d)].
inline ext prob_tail_ext(double lambda, double u_in, std::uint64_t n_in, ext var) {
  if (u_in == 0.0) return 0;
  const ext u = u_in, n = static_cast<ext>(n_in), l = lambda;
  const ext u2 = u * u;
  const ext sigma2 = n * var;
  const ext expo = l * l * n * u2 / (2 * (sigma2 + l * std::sqrt(n) * u2 / (3 * (1 - u))));
  return 2 * std::exp(-expo);
}

inline void check_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be finite and >= 0");
}

}  // namespace detail

/// gamma_n = n u / (1 - n u). Throws DomainError when n u >= 1.
inline double gamma(std::uint64_t n, double u) { return static_cast<double>(detail::gamma_ext(n, u)); }

/// sigma^2 = n Var[log(1 + d)], d ~ U[-u, u].
inline double sigma_sq(std::uint64_t n, double u) {
  detail::check_unit_roundoff(u);
  return static_cast<double>(static_cast<detail::ext>(n) * detail::log_rounding_variance(u));
}

/// p_b(lambda, u, n): lower bound on the probability that a product of n
/// rounding factors stays within gamma_tilde(n, u, lambda) of 1. May be
/// negative (vacuous). Defined as 1 when u = 0.
inline double prob_bound(double lambda, double u, std::uint64_t n) {
  detail::check_lambda(lambda);
  detail::check_unit_roundoff(u);
  if (n == 0) throw DomainError("prob_bound needs n >= 1");
  return static_cast<double>(1 - detail::prob_tail_ext(lambda, u, n, detail::log_rounding_variance(u)));
}

/// gamma~_n(lambda) = exp(lambda sqrt(n) u) - 1.
inline double gamma_tilde(std::uint64_t n, double u, double lambda) {
  detail::check_lambda(lambda);
  detail::check_unit_roundoff(u);
  return static_cast<double>(detail::gamma_tilde_ext(n, u, lambda));
}

namespace detail {
inline ext gamma_for(Analysis mode, std::uint64_t n, double u, double lambda) {
  return mode == Analysis::deterministic ? gamma_ext(n, u) : gamma_tilde_ext(n, u, lambda);
}
}  // namespace detail

/// FMA with operands already in the FMA's format: u (|ab| + |c|).
/// Deterministic and probabilistic analyses coincide.
inline CoefPair fma_coefs(double u) {
  detail::check_unit_roundoff(u);
  return {u, u};
}

/// FMA whose operands are first rounded into the FMA's format.
inline CoefPair fma_repr_coefs(double u, Analysis mode = Analysis::deterministic, double lambda = 0.0) {
  detail::check_unit_roundoff(u);
  detail::check_lambda(lambda);
  const detail::ext uu = u;
  const detail::ext g = detail::gamma_for(mode, 2, u, lambda);
  return {static_cast<double>(uu + g + uu * g), static_cast<double>(2 * uu + uu * uu)};
}

/// Multiply then add with two roundings in a format with unit roundoff u:
/// fl(fl(ab) + c) perturbs ab by at most gamma_2 and c by at most u.
/// Follows from the two-factor product bound.
inline CoefPair mac_no_fma_coefs(double u, Analysis mode = Analysis::deterministic, double lambda = 0.0) {
  detail::check_unit_roundoff(u);
  detail::check_lambda(lambda);
  return {static_cast<double>(detail::gamma_for(mode, 2, u, lambda)), u};
}

/// The second MPFMA rounding is the identity when every accumulator value is
/// representable in the output format.
inline bool is_single_rounding(const TensorCoreConfig& cfg) {
  return cfg.out.base == cfg.acc.base && cfg.out.precision >= cfg.acc.precision && cfg.out.emin <= cfg.acc.emin &&
         cfg.out.emax >= cfg.acc.emax;
}

/// zeta = u_acc + u_out + u_acc u_out (rounding to the accumulator, then to the output).
inline double mpfma_zeta(const TensorCoreConfig& cfg) {
  const detail::ext a = cfg.u_acc(), o = cfg.u_out();
  return static_cast<double>(a + o + a * o);
}

/// MPFMA with no representation error. In the single-rounding case the
/// coefficient collapses to u_acc, identical to a plain FMA in that format.
inline CoefPair mpfma_coefs(const TensorCoreConfig& cfg) {
  const double k = is_single_rounding(cfg) ? cfg.u_acc() : mpfma_zeta(cfg);
  return {k, k};
}

/// Two-stage variant with both roundings always counted.
inline CoefPair mpfma_two_stage_coefs(const TensorCoreConfig& cfg) {
  const double k = mpfma_zeta(cfg);
  return {k, k};
}

/// MPFMA whose multiplicands are rounded to the low format and whose addend is
/// rounded to the high format first. Probabilistic validity: p_b(lambda, u_low, 2).
inline CoefPair mpfma_repr_coefs(const TensorCoreConfig& cfg, Analysis mode = Analysis::deterministic,
                                 double lambda = 0.0) {
  detail::check_lambda(lambda);
  const detail::ext g = detail::gamma_for(mode, 2, cfg.u_low(), lambda);
  const detail::ext a = cfg.u_acc(), o = cfg.u_out(), h = cfg.u_high();
  const detail::ext zeta = a + o + a * o;
  return {static_cast<double>(g + zeta * (1 + g)), static_cast<double>(h + zeta * (1 + h))};
}

namespace detail {
inline ext tc_zeta_ext(std::uint64_t inner, std::uint64_t q, const TensorCoreConfig& cfg, Analysis mode,
                       double lambda) {
  if (inner == 0 || q == 0) throw DomainError("tensor core bounds need inner >= 1 and q >= 1");
  check_lambda(lambda);
  const ext ga = gamma_for(mode, inner - 1, cfg.u_acc(), lambda);
  const ext go = gamma_for(mode, q, cfg.u_out(), lambda);
  return ga + go + ga * go;
}
}  // namespace detail

/// Blocked tensor-core GEMM coefficient without representation error:
/// g_{n-1}(u_acc) + g_q(u_out) + g_{n-1}(u_acc) g_q(u_out), with g = gamma or gamma~.
inline double tc_zeta(std::uint64_t inner, std::uint64_t q, const TensorCoreConfig& cfg,
                      Analysis mode = Analysis::deterministic, double lambda = 0.0) {
  return static_cast<double>(detail::tc_zeta_ext(inner, q, cfg, mode, lambda));
}

/// Adds the rounding of A and B into the low format:
/// 2 u_low + u_low^2 + zeta (1 + u_low)^2.
inline double tc_repr_coef(std::uint64_t inner, std::uint64_t q, const TensorCoreConfig& cfg,
                           Analysis mode = Analysis::deterministic, double lambda = 0.0) {
  using detail::ext;
  const ext ul = cfg.u_low();
  if (2 * ul >= 1) throw DomainError("tc_repr_coef needs 2 u_low < 1");
  const ext zeta = detail::tc_zeta_ext(inner, q, cfg, mode, lambda);
  return static_cast<double>(2 * ul + ul * ul + zeta * (1 + ul) * (1 + ul));
}

/// Union bound on the probability that the probabilistic GEMM bound holds for
/// every element of an m x t_out result:
///   1 - m t sum_{i=1..q} sum_{j in block i} (2 - p_b(l, u_acc, c1) - p_b(l, u_out, c2))
/// with c1 = b - ((j-1) mod b) + b (q - max(2, i) + 1) and c2 = q - i + 1.
inline Probability tc_probability(std::uint64_t m, std::uint64_t t_out, std::uint64_t inner, std::uint64_t b,
                                  std::uint64_t q, const TensorCoreConfig& cfg, double lambda) {
  using detail::ext;
  detail::check_lambda(lambda);
  if (b == 0 || q == 0 || inner != q * b) throw ShapeError("tc_probability needs inner = q * b with b, q >= 1");
  const double ua = cfg.u_acc(), uo = cfg.u_out();
  const ext var_a = detail::log_rounding_variance(ua);
  const ext var_o = detail::log_rounding_variance(uo);

  ext total = 0;
  for (std::uint64_t i = 1; i <= q; ++i) {
    const std::uint64_t c2 = q - i + 1;
    const std::uint64_t blocks_after = q - std::max<std::uint64_t>(2, i) + 1;  // may be 0 when q == 1
    const ext tail_o = detail::prob_tail_ext(lambda, uo, c2, var_o);
    for (std::uint64_t r = 0; r < b; ++r) {
      const std::uint64_t c1 = b - r + b * blocks_after;
      total += detail::prob_tail_ext(lambda, ua, c1, var_a) + tail_o;
    }
  }
  const double raw = static_cast<double>(1 - static_cast<ext>(m) * static_cast<ext>(t_out) * total);
  return {raw, clamp_probability(raw)};
}

/// Smallest lambda (to within 1e-9) with f(lambda) >= target, for f
/// nondecreasing in lambda. The search bracket doubles from 1 and gives up past 1e6.
template <class F>
double solve_lambda(double target, F&& f) {
  if (!(target < 1.0)) throw DomainError("target probability must be < 1");
  if (f(0.0) >= target) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (f(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw IterationError("no lambda <= 1e6 reaches the target probability");
  }
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) >= target)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

inline double lambda_for_probability(double target, double u, std::uint64_t n) {
  return solve_lambda(target, [&](double l) { return prob_bound(l, u, n); });
}

/// Inverts the GEMM union bound (clamped) instead of a single p_b.
inline double lambda_for_tc_probability(double target, std::uint64_t m, std::uint64_t t_out, std::uint64_t inner,
                                        std::uint64_t b, const TensorCoreConfig& cfg) {
  if (b == 0 || inner % b != 0) throw ShapeError("b must divide the inner dimension");
  return solve_lambda(target, [&](double l) { return tc_probability(m, t_out, inner, b, inner / b, cfg, l).raw; });
}

}  // namespace mpbound

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

#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <system_error>

#include "mpbound/detail/eft.hpp"
#include "mpbound/errors.hpp"

namespace mpbound {

/// A floating-point system (p, beta, e_min, e_max). Numbers are
/// d0.d1...d(p-1) * beta^e with d0 != 0 and e_min <= e <= e_max.
struct FloatFormat {
  int precision = 53;
  int base = 2;
  int emin = -1022;
  int emax = 1023;
  std::string name;  // empty for unnamed custom formats

  /// Parameters only; the label does not take part.
  friend bool operator==(const FloatFormat& a, const FloatFormat& b) noexcept {
    return a.precision == b.precision && a.base == b.base && a.emin == b.emin && a.emax == b.emax;
  }
};

inline FloatFormat fp16() { return {11, 2, -14, 15, "fp16"}; }
inline FloatFormat fp32() { return {24, 2, -126, 127, "fp32"}; }
inline FloatFormat fp64() { return {53, 2, -1022, 1023, "fp64"}; }

/// Largest significand width an emulated compute format may have. Products of
/// two such significands (2p <= 50 bits) are exact in binary64.
inline constexpr int kMaxEmulatedPrecision = 25;

inline void validate(const FloatFormat& f) {
  if (f.precision < 1) throw FormatError("precision must be >= 1");
  if (f.base < 2) throw FormatError("base must be >= 2");
  if (f.emin >= f.emax) throw FormatError("emin must be < emax");
}

/// u = beta^(1-p) / 2
inline double unit_roundoff(const FloatFormat& f) {
  validate(f);
  if (f.base == 2) return std::ldexp(0.5, 1 - f.precision);
  return 0.5 * std::pow(static_cast<double>(f.base), 1 - f.precision);
}

struct RangeLimits {
  double min_normal;
  double max_finite;
};

inline RangeLimits range_limits(const FloatFormat& f) {
  validate(f);
  if (f.base == 2) {
    return {std::ldexp(1.0, f.emin), std::ldexp(2.0 - std::ldexp(1.0, 1 - f.precision), f.emax)};
  }
  const double beta = f.base;
  return {std::pow(beta, f.emin), (beta - std::pow(beta, 1 - f.precision)) * std::pow(beta, f.emax)};
}

/// True when values of `f` can be held exactly in binary64 and rounded to by
/// this library (binary, p <= 53, exponent range inside binary64's normal range).
inline bool fits_carrier(const FloatFormat& f) noexcept {
  return f.base == 2 && f.precision >= 1 && f.precision <= 53 && f.emin >= -1022 && f.emax <= 1023 &&
         f.emin < f.emax;
}

/// Formats usable as compute formats by the kernels.
inline bool is_emulable(const FloatFormat& f) noexcept {
  return fits_carrier(f) && f.precision <= kMaxEmulatedPrecision;
}

inline void require_emulable(const FloatFormat& f) {
  validate(f);
  if (!is_emulable(f))
    throw FormatError("compute formats must be binary with p <= 25 and a binary64-compatible exponent range");
}

inline std::string to_string(const FloatFormat& f) {
  if (!f.name.empty()) return f.name;
  std::string s = "custom:p=" + std::to_string(f.precision) + ",emin=" + std::to_string(f.emin) +
                  ",emax=" + std::to_string(f.emax);
  if (f.base != 2) s += ",beta=" + std::to_string(f.base);
  return s;
}

/// Grammar: "fp16" | "fp32" | "fp64" | "custom:p=<int>,emin=<int>,emax=<int>".
inline FloatFormat parse_format(std::string_view spec) {
  if (spec == "fp16") return fp16();
  if (spec == "fp32") return fp32();
  if (spec == "fp64") return fp64();
  constexpr std::string_view prefix = "custom:";
  if (!spec.starts_with(prefix)) throw FormatError("unknown format '" + std::string(spec) + "'");
  spec.remove_prefix(prefix.size());

  FloatFormat f{0, 2, 0, 0, ""};
  bool seen_p = false, seen_emin = false, seen_emax = false;
  while (!spec.empty()) {
    const auto comma = spec.find(',');
    const std::string_view item = spec.substr(0, comma);
    spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);

    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw FormatError("expected key=value in '" + std::string(item) + "'");
    const std::string_view key = item.substr(0, eq);
    const std::string_view val = item.substr(eq + 1);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
    if (ec != std::errc{} || ptr != val.data() + val.size())
      throw FormatError("bad integer '" + std::string(val) + "'");

    if (key == "p" && !seen_p) {
      f.precision = v;
      seen_p = true;
    } else if (key == "emin" && !seen_emin) {
      f.emin = v;
      seen_emin = true;
    } else if (key == "emax" && !seen_emax) {
      f.emax = v;
      seen_emax = true;
    } else {
      throw FormatError("unexpected or repeated key '" + std::string(key) + "'");
    }
  }
  if (!(seen_p && seen_emin && seen_emax)) throw FormatError("custom format needs p, emin and emax");
  validate(f);
  return f;
}

/// fl(z) = z(1 + delta). For composite kernels `delta` is the realized relative
/// error of the final result against the exact mathematical result.
struct RoundedValue {
  double value = 0.0;
  bool inexact = false;
  double delta = 0.0;
};

namespace detail {

struct RoundOutcome {
  double value = 0.0;
  double delta = 0.0;
  bool inexact = false;
  RangeFault fault = RangeFault::none;
};

/// Correctly rounds the exact value hi + lo (round to nearest, ties to even)
/// into a binary format with p <= 53. Requires hi == fl(hi + lo), which holds
/// for the output of two_sum. No format validation.
inline RoundOutcome round_sum(double hi, double lo, const FloatFormat& f) noexcept {
  if (hi == 0.0) return {hi, 0.0, false, RangeFault::none};

  const double min_normal = std::ldexp(1.0, f.emin);
  const double ahi = std::fabs(hi);
  if (ahi < min_normal || (ahi == min_normal && lo != 0.0 && std::signbit(lo) != std::signbit(hi)))
    return {0.0, 0.0, true, RangeFault::underflow};

  // Scale so the target grid spacing in hi's binade is 1.
  const int shift = f.precision - 1 - std::ilogb(hi);
  const double scaled = std::ldexp(hi, shift);
  double r = std::floor(scaled);
  const double frac = scaled - r;
  if (frac > 0.5) {
    r += 1.0;
  } else if (frac == 0.5) {
    if (lo != 0.0)
      r += (lo > 0.0) ? 1.0 : 0.0;
    else if (std::fmod(r, 2.0) != 0.0)
      r += 1.0;
  }
  const double value = std::ldexp(r, -shift);

  const double max_finite = std::ldexp(2.0 - std::ldexp(1.0, 1 - f.precision), f.emax);
  if (!(std::fabs(value) <= max_finite)) return {value, 0.0, true, RangeFault::overflow};

  if (value == hi && lo == 0.0) return {value, 0.0, false, RangeFault::none};
  // value - hi is exact (Sterbenz); the division is the only rounding.
  return {value, ((value - hi) - lo) / hi, true, RangeFault::none};
}

inline RoundOutcome round_value(double z, const FloatFormat& f) noexcept { return round_sum(z, 0.0, f); }

inline RoundedValue to_rounded(const RoundOutcome& o, const char* what) {
  if (o.fault != RangeFault::none) throw RangeError(o.fault, what);
  return {o.value, o.inexact, o.delta};
}

inline void require_carrier(const FloatFormat& f) {
  validate(f);
  if (!fits_carrier(f)) throw FormatError("rounding supports binary formats with p <= 53 inside the binary64 range");
}

inline void require_finite(double z) {
  if (!std::isfinite(z)) throw DomainError("value must be finite");
}

}  // namespace detail

/// Nearest value of `f` to z, ties to even. Subnormal results are not
/// supported and raise RangeError(underflow).
inline RoundedValue round(double z, const FloatFormat& f) {
  detail::require_carrier(f);
  detail::require_finite(z);
  return detail::to_rounded(detail::round_value(z, f), "value outside the normal range of the format");
}

inline bool is_representable(double z, const FloatFormat& f) {
  detail::require_carrier(f);
  if (!std::isfinite(z)) return false;
  const auto o = detail::round_value(z, f);
  return o.fault == RangeFault::none && !o.inexact;
}

/// Re-rounds a value of `from` into `to`.
inline RoundedValue convert(double z, const FloatFormat& from, const FloatFormat& to) {
  detail::require_carrier(to);
  if (!is_representable(z, from)) throw ExactnessError("convert: value is not representable in the source format");
  return detail::to_rounded(detail::round_value(z, to), "conversion leaves the normal range of the target format");
}

}  // namespace mpbound

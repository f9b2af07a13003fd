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

#include <cstddef>
#include <string>
#include <string_view>

#include "mpbound/errors.hpp"
#include "mpbound/format.hpp"

namespace mpbound {

/// Precision profile of a mixed-precision multiply-accumulate unit.
///  - low:  storage of the multiplicands (u_low)
///  - high: storage of the addend / accumulator input (u_high)
///  - mul:  format the products are formed in (u~); must hold them exactly
///  - acc:  format each accumulation is rounded to (u-bar)
///  - out:  format of the stored result (u_FMA)
struct TensorCoreConfig {
  FloatFormat low;
  FloatFormat high;
  FloatFormat mul;
  FloatFormat acc;
  FloatFormat out;

  double u_low() const { return unit_roundoff(low); }
  double u_high() const { return unit_roundoff(high); }
  double u_mul() const { return unit_roundoff(mul); }
  double u_acc() const { return unit_roundoff(acc); }
  double u_out() const { return unit_roundoff(out); }

  friend bool operator==(const TensorCoreConfig&, const TensorCoreConfig&) = default;
};

/// fp16 inputs, fp32 products, accumulation and output.
inline TensorCoreConfig tc_fp16_fp32() { return {fp16(), fp32(), fp32(), fp32(), fp32()}; }

/// fp16 inputs and accumulation, fp32 products.
inline TensorCoreConfig tc_fp16_fp16() { return {fp16(), fp16(), fp32(), fp16(), fp16()}; }

inline void validate(const TensorCoreConfig& c) {
  for (const FloatFormat* f : {&c.low, &c.high, &c.mul, &c.acc, &c.out}) require_emulable(*f);
  if (c.u_high() > c.u_low()) throw FormatError("config: u_high must not exceed u_low");
  if (c.u_mul() > c.u_high()) throw FormatError("config: product unit roundoff must not exceed u_high");
  if (2 * c.low.precision > c.mul.precision)
    throw FormatError("config: product format must hold the full product of two low-precision significands");
}

/// "low/high/mul/acc/out"
inline std::string to_string(const TensorCoreConfig& c) {
  return to_string(c.low) + "/" + to_string(c.high) + "/" + to_string(c.mul) + "/" + to_string(c.acc) + "/" +
         to_string(c.out);
}

/// Accepts the preset names "fp16-fp32" and "fp16-fp16", or five format specs
/// separated by '/'.
inline TensorCoreConfig parse_config(std::string_view spec) {
  TensorCoreConfig c;
  if (spec == "fp16-fp32") {
    c = tc_fp16_fp32();
  } else if (spec == "fp16-fp16") {
    c = tc_fp16_fp16();
  } else {
    FloatFormat* slots[] = {&c.low, &c.high, &c.mul, &c.acc, &c.out};
    std::size_t n = 0;
    while (true) {
      const auto slash = spec.find('/');
      if (n == 5) throw FormatError("config needs exactly five formats");
      *slots[n++] = parse_format(spec.substr(0, slash));
      if (slash == std::string_view::npos) break;
      spec.remove_prefix(slash + 1);
    }
    if (n != 5) throw FormatError("config needs exactly five formats");
  }
  validate(c);
  return c;
}

/// Blocked GEMM dimensions: D (m x t_out) = A (m x inner) * B (inner x t_out),
/// computed in b1 x b2 output tiles with inner blocks of length b.
struct GemmShape {
  std::size_t m = 0;
  std::size_t inner = 0;
  std::size_t t_out = 0;
  std::size_t b1 = 4;
  std::size_t b = 4;
  std::size_t b2 = 4;

  std::size_t p() const { return m / b1; }
  std::size_t q() const { return inner / b; }
  std::size_t r() const { return t_out / b2; }

  friend bool operator==(const GemmShape&, const GemmShape&) = default;
};

inline void validate(const GemmShape& s) {
  if (s.m == 0 || s.inner == 0 || s.t_out == 0) throw ShapeError("matrix dimensions must be positive");
  if (s.b1 == 0 || s.b == 0 || s.b2 == 0) throw ShapeError("block sizes must be positive");
  if (s.m % s.b1 != 0) throw ShapeError("b1 must divide m");
  if (s.inner % s.b != 0) throw ShapeError("b must divide the inner dimension");
  if (s.t_out % s.b2 != 0) throw ShapeError("b2 must divide t_out");
}

}  // namespace mpbound

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
#include <vector>

// Error-free transformations on binary64. These rely on strict IEEE semantics:
// do not build with -ffast-math.
namespace mpbound::detail {

/// hi + lo == a + b exactly, hi == fl(a + b).
struct DoubleSum {
  double hi;
  double lo;
};

inline DoubleSum two_sum(double a, double b) noexcept {
  const double s = a + b;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

/// Exact running sum of doubles kept as non-overlapping partials
/// (Shewchuk's grow-expansion, as in Python's math.fsum).
class ExactSum {
 public:
  void add(double x) {
    std::size_t i = 0;
    for (double y : partials_) {
      if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials_[i++] = lo;
      x = hi;
    }
    partials_.resize(i);
    partials_.push_back(x);
  }

  bool is_zero() const noexcept {
    for (double p : partials_)
      if (p != 0.0) return false;
    return true;
  }

  /// Sum of the partials, largest last; accurate to about one rounding.
  double approx() const noexcept {
    double s = 0.0;
    for (double p : partials_) s += p;
    return s;
  }

 private:
  std::vector<double> partials_;
};

}  // namespace mpbound::detail

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
#include <span>
#include <vector>

#include "mpbound/errors.hpp"

namespace mpbound {

/// Empirical distribution function F(t) = #{x_i <= t} / n (right-continuous).
class Edf {
 public:
  explicit Edf(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw EmptyInput("an EDF needs at least one sample");
    std::sort(sorted_.begin(), sorted_.end());
  }

  double operator()(double t) const noexcept {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), t);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
  }

  /// Smallest sample x with F(x) >= prob, prob in (0, 1].
  double quantile(double prob) const noexcept {
    const double pos = std::ceil(prob * static_cast<double>(sorted_.size()));
    const std::size_t idx = pos <= 1.0 ? 0 : static_cast<std::size_t>(pos) - 1;
    return sorted_[std::min(idx, sorted_.size() - 1)];
  }

  double median() const noexcept { return quantile(0.5); }
  double min() const noexcept { return sorted_.front(); }
  double max() const noexcept { return sorted_.back(); }
  std::size_t size() const noexcept { return sorted_.size(); }
  const std::vector<double>& samples() const noexcept { return sorted_; }

 private:
  std::vector<double> sorted_;
};

inline Edf build_edf(std::span<const double> values) { return Edf(std::vector<double>(values.begin(), values.end())); }

}  // namespace mpbound

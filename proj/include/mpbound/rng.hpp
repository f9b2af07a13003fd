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

#include <cstdint>

namespace mpbound {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based generator: the value at a counter is a pure function of
/// (seed, stream, trial, counter), so any evaluation order gives the same draws.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t trial) noexcept
      : key_(splitmix64(splitmix64(splitmix64(seed) + stream) + trial)) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept { return splitmix64(key_ + splitmix64(counter)); }

  /// Uniform on [0, 1) with 53 random bits.
  constexpr double uniform01(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1p-53;
  }

 private:
  std::uint64_t key_;
};

}  // namespace mpbound

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
#include <stdexcept>
#include <string>

namespace mpbound {

/// Invalid floating-point format parameters or an unparsable format spec.
class FormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class RangeFault : std::uint8_t { none, overflow, underflow };

inline const char* to_string(RangeFault f) noexcept {
  switch (f) {
    case RangeFault::overflow: return "overflow";
    case RangeFault::underflow: return "underflow";
    default: return "none";
  }
}

/// A value left the normal range of the target format.
class RangeError : public std::range_error {
 public:
  RangeError(RangeFault fault, const std::string& what)
      : std::range_error(std::string(to_string(fault)) + ": " + what), fault_(fault) {}
  RangeFault fault() const noexcept { return fault_; }

 private:
  RangeFault fault_;
};

/// A bound constant is undefined for the requested arguments (e.g. n*u >= 1).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An operand that must be exact in some format is not.
class ExactnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IterationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mpbound

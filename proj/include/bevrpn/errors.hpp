// Copyright 2026 The bevrpn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BEVRPN__ERRORS_HPP_
#define BEVRPN__ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bevrpn
{

/// A precondition or invariant of an operation was not met by the caller.
class ContractViolation : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

/// Invalid configuration (calibration, grid, pipeline options).
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Input geometry that admits no meaningful result (e.g. every point at the origin).
class DegenerateGeometryError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Malformed file content. `field()` names the offending field or record.
class FormatError : public std::runtime_error
{
public:
  FormatError(std::string field, const std::string & message)
  : std::runtime_error(message), field_(std::move(field))
  {
  }

  const std::string & field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Filesystem failure while reading or writing.
class IoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace bevrpn

#endif  // BEVRPN__ERRORS_HPP_

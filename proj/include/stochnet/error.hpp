/*
 * Copyright 2026 The stochnet Authors
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

#include <stdexcept>
#include <string>
#include <vector>

namespace stochnet {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A NetworkSpec violated one or more structural rules.
class SpecError : public Error {
 public:
  explicit SpecError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable files: CSV, PPM/PGM, checkpoints.
class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A parameter or gradient became NaN or infinite.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration was requested on a network whose discrete state space
/// exceeds the enumeration guard.
class StateSpaceError : public Error {
 public:
  using Error::Error;
};

/// Gibbs sampling reached a variable whose every event has zero conditional
/// probability.
class NonErgodicError : public Error {
 public:
  using Error::Error;
};

/// The host refused a resource: an unbindable port, an unwritable path.
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

}  // namespace stochnet

/*
 * Copyright 2026 The mcf Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MCF_ERRORS_HPP
#define MCF_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcf {

/// Base of every error raised by the library. The CLI maps subclasses to
/// exit codes through `exit_code()`.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 2; }
};

/// Malformed input text. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 1; }
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class AlignmentError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Taxonomy structure violations (cycles, kind mismatches, duplicates).
class StructureError : public Error {
 public:
  using Error::Error;
};

class DanglingReferenceError : public StructureError {
 public:
  using StructureError::StructureError;
};

class PipelineError : public Error {
 public:
  using Error::Error;
};

/// Numeric failures: exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

class DivergenceError : public NumericError {
 public:
  explicit DivergenceError(int epoch)
      : NumericError("training diverged (non-finite parameter) in epoch " +
                     std::to_string(epoch)),
        epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

class SingularSystemError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace mcf

#endif  // MCF_ERRORS_HPP

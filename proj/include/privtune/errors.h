// Copyright 2026 The privtune Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRIVTUNE_ERRORS_H_
#define PRIVTUNE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace privtune {

// Root of the library's exception hierarchy. The CLI maps subclasses onto
// process exit codes (see commands.h).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad caller-supplied argument or configuration value.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Shapes or dimensions that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An id or label outside its valid range.
class IndexError : public Error {
 public:
  using Error::Error;
};

// Malformed input data: parse failures, duplicates, OOV tokens, I/O.
class DataError : public Error {
 public:
  using Error::Error;
};

// Embedding file whose row widths disagree. Carries the 1-based line number.
class MalformedFileError : public DataError {
 public:
  MalformedFileError(const std::string& what, int line)
      : DataError(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class DuplicateTokenError : public DataError {
 public:
  using DataError::DataError;
};

// Non-finite loss, diverging optimizer, stale forward trace.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace privtune

#endif  // PRIVTUNE_ERRORS_H_

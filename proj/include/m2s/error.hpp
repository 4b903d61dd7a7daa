// Copyright (c) 2026 The m2s Authors
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

#ifndef M2S_ERROR_HPP_
#define M2S_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace m2s {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data or configuration (exit code 1).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A line-oriented input failed to parse.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Filesystem or container-format failure (exit code 2).
class IoError : public Error {
 public:
  using Error::Error;
};

// A required upstream artifact (trained vocoder, codebook, cache) is absent
// (exit code 3).
class MissingDependencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace m2s

#endif  // M2S_ERROR_HPP_

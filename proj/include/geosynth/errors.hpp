// Copyright 2026 The Geosynth Authors
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

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace geosynth {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value does not conform to the declared schema (unknown category, wrong
// header, missing required column).
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what,
                       std::optional<std::size_t> row = std::nullopt)
      : Error(what), row_(row) {}

  // Zero-based data row that triggered the error, when known.
  std::optional<std::size_t> row() const { return row_; }

 private:
  std::optional<std::size_t> row_;
};

// A cell could not be parsed as the declared type.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Coordinate column with zero range.
class DegenerateRangeError : public Error {
 public:
  using Error::Error;
};

// A run configuration or plan is inconsistent with the data.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Fewer estimates than a procedure needs.
class ArityError : public Error {
 public:
  using Error::Error;
};

// An estimator had no observations to work with.
class EmptyCellError : public Error {
 public:
  using Error::Error;
};

// Iterative fit failed (separation or singular information).
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::string predictor = {})
      : Error(what), predictor_(std::move(predictor)) {}

  // Model term blamed for the failure; empty when unknown.
  const std::string& predictor() const { return predictor_; }

 private:
  std::string predictor_;
};

// Dense factorization failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace geosynth

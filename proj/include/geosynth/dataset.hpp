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
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace geosynth {

enum class VariableKind { kContinuous, kCategorical };

enum class VariableRole { kLongitude, kLatitude, kAttribute, kOutcome };

std::string_view to_string(VariableKind kind);
std::string_view to_string(VariableRole role);
VariableKind parse_variable_kind(std::string_view text);
VariableRole parse_variable_role(std::string_view text);

// Label used for materialized missing categorical cells.
inline constexpr std::string_view kMissingLevel = "missing";

struct VariableSpec {
  std::string name;
  VariableKind kind = VariableKind::kContinuous;
  // Ordered category labels; empty for continuous variables.
  std::vector<std::string> levels;
  VariableRole role = VariableRole::kAttribute;

  bool is_categorical() const { return kind == VariableKind::kCategorical; }
  std::optional<int> level_index(std::string_view label) const;
};

// Ordered list of variables. Microdata schemas carry exactly one longitude
// and one latitude column; report tables may carry none.
class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<VariableSpec> variables,
                  bool require_coordinates = true);

  std::size_t size() const { return variables_.size(); }
  const VariableSpec& operator[](std::size_t i) const { return variables_[i]; }
  const std::vector<VariableSpec>& variables() const { return variables_; }

  std::optional<std::size_t> find(std::string_view name) const;
  // Throws SchemaError when the name is unknown.
  std::size_t index_of(std::string_view name) const;

  bool has_coordinates() const { return longitude_.has_value(); }
  // Throws SchemaError when the schema has no coordinate roles.
  std::size_t longitude() const;
  std::size_t latitude() const;

  std::vector<std::string> names() const;

  friend bool operator==(const Schema& a, const Schema& b);

 private:
  std::vector<VariableSpec> variables_;
  std::optional<std::size_t> longitude_;
  std::optional<std::size_t> latitude_;
};

// Immutable column-major table. Categorical cells hold the zero-based level
// index stored as a double, so every column is a contiguous span of doubles.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Schema schema, std::vector<std::vector<double>> columns,
          std::vector<std::int64_t> record_ids = {});

  const Schema& schema() const { return schema_; }
  std::size_t n_rows() const { return record_ids_.size(); }
  std::size_t n_cols() const { return columns_.size(); }

  std::span<const double> column(std::size_t j) const { return columns_[j]; }
  std::span<const double> column(std::string_view name) const {
    return columns_[schema_.index_of(name)];
  }
  double value(std::size_t row, std::size_t col) const {
    return columns_[col][row];
  }
  int code(std::size_t row, std::size_t col) const {
    return static_cast<int>(columns_[col][row]);
  }
  const std::string& label(std::size_t row, std::size_t col) const;

  std::int64_t record_id(std::size_t row) const { return record_ids_[row]; }
  std::span<const std::int64_t> record_ids() const { return record_ids_; }

  // All values of one record in schema order.
  std::vector<double> row(std::size_t i) const;

  // Copy with one column replaced; the replacement is validated.
  Dataset with_column(std::size_t j, std::vector<double> values) const;
  Dataset with_columns(const std::map<std::size_t, std::vector<double>>&
                           replacements) const;
  // Copy with a column appended.
  Dataset with_added_column(VariableSpec spec,
                            std::vector<double> values) const;
  // Copy restricted to the given rows (record ids are carried over).
  Dataset select_rows(std::span<const std::size_t> rows) const;

 private:
  void validate() const;

  Schema schema_;
  std::vector<std::vector<double>> columns_;
  std::vector<std::int64_t> record_ids_;
};

// Schema sidecar (JSON) I/O.
Schema load_schema(const std::string& path, bool require_coordinates = true);
void save_schema(const std::string& path, const Schema& schema);
std::string schema_to_json(const Schema& schema);
Schema schema_from_json(std::string_view text, bool require_coordinates = true);

struct CsvOptions {
  bool require_coordinates = true;
};

// Reads a comma-delimited UTF-8 file with a header row. Header columns may
// appear in any order but must name exactly the schema's variables. "NA" and
// empty categorical cells map to the "missing" level when the variable
// declares one.
Dataset load_csv(const std::string& path, const Schema& schema,
                 CsvOptions options = {});
Dataset parse_csv(std::string_view text, const Schema& schema,
                  CsvOptions options = {});

// Continuous cells use the shortest representation that round-trips.
void write_csv(const std::string& path, const Dataset& ds);
std::string format_csv(const Dataset& ds);
std::string format_double(double v);

}  // namespace geosynth

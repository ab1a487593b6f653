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

#include "geosynth/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "geosynth/errors.hpp"

namespace geosynth {

std::string_view to_string(VariableKind kind) {
  return kind == VariableKind::kContinuous ? "continuous" : "categorical";
}

std::string_view to_string(VariableRole role) {
  switch (role) {
    case VariableRole::kLongitude:
      return "longitude";
    case VariableRole::kLatitude:
      return "latitude";
    case VariableRole::kAttribute:
      return "attribute";
    case VariableRole::kOutcome:
      return "outcome";
  }
  return "attribute";
}

VariableKind parse_variable_kind(std::string_view text) {
  if (text == "continuous") return VariableKind::kContinuous;
  if (text == "categorical") return VariableKind::kCategorical;
  throw SchemaError("unknown variable kind '" + std::string(text) + "'");
}

VariableRole parse_variable_role(std::string_view text) {
  if (text == "longitude") return VariableRole::kLongitude;
  if (text == "latitude") return VariableRole::kLatitude;
  if (text == "attribute") return VariableRole::kAttribute;
  if (text == "outcome") return VariableRole::kOutcome;
  throw SchemaError("unknown variable role '" + std::string(text) + "'");
}

std::optional<int> VariableSpec::level_index(std::string_view label) const {
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (levels[k] == label) return static_cast<int>(k);
  }
  return std::nullopt;
}

Schema::Schema(std::vector<VariableSpec> variables, bool require_coordinates)
    : variables_(std::move(variables)) {
  std::set<std::string> seen;
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    const VariableSpec& v = variables_[j];
    if (v.name.empty()) throw SchemaError("variable with empty name");
    if (!seen.insert(v.name).second) {
      throw SchemaError("duplicate variable '" + v.name + "'");
    }
    if (v.is_categorical()) {
      if (v.levels.empty()) {
        throw SchemaError("categorical variable '" + v.name +
                          "' declares no levels");
      }
      std::set<std::string> lv;
      for (const auto& l : v.levels) {
        if (l.empty()) {
          throw SchemaError("variable '" + v.name + "' has an empty level");
        }
        if (!lv.insert(l).second) {
          throw SchemaError("variable '" + v.name + "' repeats level '" + l +
                            "'");
        }
      }
    } else if (!v.levels.empty()) {
      throw SchemaError("continuous variable '" + v.name +
                        "' must not declare levels");
    }
    if (v.role == VariableRole::kLongitude ||
        v.role == VariableRole::kLatitude) {
      if (v.is_categorical()) {
        throw SchemaError("coordinate variable '" + v.name +
                          "' must be continuous");
      }
      auto& slot =
          v.role == VariableRole::kLongitude ? longitude_ : latitude_;
      if (slot) {
        throw SchemaError("more than one " + std::string(to_string(v.role)) +
                          " variable");
      }
      slot = j;
    }
  }
  if (longitude_.has_value() != latitude_.has_value()) {
    throw SchemaError("schema needs both a longitude and a latitude variable");
  }
  if (require_coordinates && !longitude_) {
    throw SchemaError("schema has no longitude/latitude variables");
  }
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    if (variables_[j].name == name) return j;
  }
  return std::nullopt;
}

std::size_t Schema::index_of(std::string_view name) const {
  if (auto j = find(name)) return *j;
  throw SchemaError("unknown variable '" + std::string(name) + "'");
}

std::size_t Schema::longitude() const {
  if (!longitude_) throw SchemaError("schema has no longitude variable");
  return *longitude_;
}

std::size_t Schema::latitude() const {
  if (!latitude_) throw SchemaError("schema has no latitude variable");
  return *latitude_;
}

std::vector<std::string> Schema::names() const {
  std::vector<std::string> out;
  out.reserve(variables_.size());
  for (const auto& v : variables_) out.push_back(v.name);
  return out;
}

bool operator==(const Schema& a, const Schema& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const auto& x = a[j];
    const auto& y = b[j];
    if (x.name != y.name || x.kind != y.kind || x.levels != y.levels ||
        x.role != y.role) {
      return false;
    }
  }
  return true;
}

Dataset::Dataset(Schema schema, std::vector<std::vector<double>> columns,
                 std::vector<std::int64_t> record_ids)
    : schema_(std::move(schema)),
      columns_(std::move(columns)),
      record_ids_(std::move(record_ids)) {
  if (columns_.size() != schema_.size()) {
    throw SchemaError("dataset has " + std::to_string(columns_.size()) +
                      " columns but schema declares " +
                      std::to_string(schema_.size()));
  }
  const std::size_t n = columns_.empty() ? record_ids_.size()
                                         : columns_.front().size();
  if (record_ids_.empty() && n > 0) {
    record_ids_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      record_ids_[i] = static_cast<std::int64_t>(i);
    }
  }
  validate();
}

void Dataset::validate() const {
  const std::size_t n = record_ids_.size();
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    const VariableSpec& v = schema_[j];
    if (columns_[j].size() != n) {
      throw SchemaError("column '" + v.name + "' has " +
                        std::to_string(columns_[j].size()) + " rows, expected " +
                        std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double x = columns_[j][i];
      if (!std::isfinite(x)) {
        throw SchemaError("non-finite value in column '" + v.name + "'", i);
      }
      if (v.is_categorical()) {
        if (x != std::floor(x) || x < 0 ||
            x >= static_cast<double>(v.levels.size())) {
          throw SchemaError("invalid level code in column '" + v.name + "'",
                            i);
        }
      }
    }
  }
}

const std::string& Dataset::label(std::size_t row, std::size_t col) const {
  return schema_[col].levels.at(static_cast<std::size_t>(code(row, col)));
}

std::vector<double> Dataset::row(std::size_t i) const {
  std::vector<double> out(columns_.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) out[j] = columns_[j][i];
  return out;
}

Dataset Dataset::with_column(std::size_t j, std::vector<double> values) const {
  std::map<std::size_t, std::vector<double>> r;
  r.emplace(j, std::move(values));
  return with_columns(r);
}

Dataset Dataset::with_columns(
    const std::map<std::size_t, std::vector<double>>& replacements) const {
  std::vector<std::vector<double>> cols = columns_;
  for (const auto& [j, values] : replacements) {
    if (j >= cols.size()) throw SchemaError("column index out of range");
    cols[j] = values;
  }
  return Dataset(schema_, std::move(cols), record_ids_);
}

Dataset Dataset::with_added_column(VariableSpec spec,
                                   std::vector<double> values) const {
  std::vector<VariableSpec> vars = schema_.variables();
  vars.push_back(std::move(spec));
  std::vector<std::vector<double>> cols = columns_;
  cols.push_back(std::move(values));
  return Dataset(Schema(std::move(vars), schema_.has_coordinates()),
                 std::move(cols), record_ids_);
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  std::vector<std::vector<double>> cols(columns_.size());
  std::vector<std::int64_t> ids;
  ids.reserve(rows.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    cols[j].reserve(rows.size());
    for (std::size_t r : rows) cols[j].push_back(columns_[j].at(r));
  }
  for (std::size_t r : rows) ids.push_back(record_ids_.at(r));
  return Dataset(schema_, std::move(cols), std::move(ids));
}

std::string schema_to_json(const Schema& schema) {
  nlohmann::ordered_json doc;
  doc["variables"] = nlohmann::ordered_json::array();
  for (const auto& v : schema.variables()) {
    nlohmann::ordered_json e;
    e["name"] = v.name;
    e["kind"] = std::string(to_string(v.kind));
    if (v.is_categorical()) e["levels"] = v.levels;
    e["role"] = std::string(to_string(v.role));
    doc["variables"].push_back(std::move(e));
  }
  return doc.dump(2) + "\n";
}

Schema schema_from_json(std::string_view text, bool require_coordinates) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed schema JSON: ") + e.what());
  }
  if (!doc.contains("variables") || !doc["variables"].is_array()) {
    throw SchemaError("schema JSON needs a 'variables' array");
  }
  std::vector<VariableSpec> vars;
  for (const auto& e : doc["variables"]) {
    VariableSpec v;
    v.name = e.at("name").get<std::string>();
    v.kind = parse_variable_kind(e.value("kind", std::string("continuous")));
    if (e.contains("levels")) {
      v.levels = e["levels"].get<std::vector<std::string>>();
    }
    v.role = parse_variable_role(e.value("role", std::string("attribute")));
    vars.push_back(std::move(v));
  }
  return Schema(std::move(vars), require_coordinates);
}

Schema load_schema(const std::string& path, bool require_coordinates) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return schema_from_json(buf.str(), require_coordinates);
}

void save_schema(const std::string& path, const Schema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write schema file '" + path + "'");
  out << schema_to_json(schema);
}

}  // namespace geosynth

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

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "geosynth/dataset.hpp"
#include "geosynth/errors.hpp"

namespace geosynth {
namespace {

// Splits one CSV record. Double-quoted fields may contain commas and doubled
// quotes.
std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool is_na(std::string_view cell) { return cell.empty() || cell == "NA"; }

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

Dataset parse_csv(std::string_view text, const Schema& schema,
                  CsvOptions options) {
  if (options.require_coordinates && !schema.has_coordinates()) {
    throw SchemaError("schema has no longitude/latitude variables");
  }
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw SchemaError("CSV input has no header row");

  std::string_view header_line = lines.front();
  if (header_line.starts_with("\xEF\xBB\xBF")) header_line.remove_prefix(3);
  const std::vector<std::string> header = split_record(header_line);
  if (header.size() != schema.size()) {
    throw SchemaError("header has " + std::to_string(header.size()) +
                      " columns but schema declares " +
                      std::to_string(schema.size()));
  }
  // file column -> schema column
  std::vector<std::size_t> target(header.size());
  std::vector<bool> used(schema.size(), false);
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name(trim(header[c]));
    auto j = schema.find(name);
    if (!j) throw SchemaError("header column '" + name + "' not in schema");
    if (used[*j]) throw SchemaError("header repeats column '" + name + "'");
    used[*j] = true;
    target[c] = *j;
  }

  const std::size_t n = lines.size() - 1;
  std::vector<std::vector<double>> cols(schema.size(), std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const std::vector<std::string> cells = split_record(lines[r + 1]);
    if (cells.size() != header.size()) {
      throw ParseError("row " + std::to_string(r) + ": expected " +
                       std::to_string(header.size()) + " cells, found " +
                       std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::size_t j = target[c];
      const VariableSpec& v = schema[j];
      const std::string_view cell = trim(cells[c]);
      if (v.is_categorical()) {
        std::optional<int> code = v.level_index(cell);
        if (!code && is_na(cell)) code = v.level_index(kMissingLevel);
        if (!code) {
          throw SchemaError("row " + std::to_string(r) + ", column '" +
                                v.name + "': unknown category '" +
                                std::string(cell) + "'",
                            r);
        }
        cols[j][r] = *code;
      } else {
        double x = 0;
        const char* first = cell.data();
        const char* last = cell.data() + cell.size();
        if (!cell.empty() && *first == '+') ++first;
        auto [ptr, ec] = std::from_chars(first, last, x);
        if (cell.empty() || ec != std::errc() || ptr != last ||
            !std::isfinite(x)) {
          throw ParseError("row " + std::to_string(r) + ", column '" + v.name +
                           "': cannot parse '" + std::string(cell) +
                           "' as a finite number");
        }
        cols[j][r] = x;
      }
    }
  }
  return Dataset(schema, std::move(cols));
}

Dataset load_csv(const std::string& path, const Schema& schema,
                 CsvOptions options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open CSV file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema, options);
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return std::to_string(v);
  return std::string(buf, ptr);
}

std::string format_csv(const Dataset& ds) {
  std::string out;
  const Schema& s = ds.schema();
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (j) out.push_back(',');
    out += quote_if_needed(s[j].name);
  }
  out.push_back('\n');
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j) out.push_back(',');
      if (s[j].is_categorical()) {
        out += quote_if_needed(ds.label(i, j));
      } else {
        out += format_double(ds.value(i, j));
      }
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write CSV file '" + path + "'");
  out << format_csv(ds);
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace geosynth

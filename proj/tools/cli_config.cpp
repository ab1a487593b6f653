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

#include "cli_config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "geosynth/errors.hpp"

namespace geosynth::cli {
namespace {

struct KeyDefault {
  const char* key;
  const char* value;
};

constexpr std::array kDefaults{
    KeyDefault{"run.seed", "1"},
    KeyDefault{"run.out", "out"},
    KeyDefault{"run.threads", "0"},
    KeyDefault{"data.input", ""},
    KeyDefault{"data.schema", ""},
    KeyDefault{"data.release", ""},
    KeyDefault{"data.regions", "standard"},
    KeyDefault{"simulate.n", "2000"},
    KeyDefault{"simulate.outcome", "false"},
    KeyDefault{"simulate.outcome_name", "death"},
    KeyDefault{"simulate.autopsy", "false"},
    KeyDefault{"synth.plan", "geography"},
    KeyDefault{"synth.m", "5"},
    KeyDefault{"synth.h", "1"},
    KeyDefault{"synth.h_age", "2"},
    KeyDefault{"synth.age", "age"},
    KeyDefault{"synth.race", "race"},
    KeyDefault{"synth.min_node_size", "5"},
    KeyDefault{"synth.min_dev_fraction", "1e-4"},
    KeyDefault{"synth.metadata_level", "full"},
    KeyDefault{"synth.latitude_first", "false"},
    KeyDefault{"synth.per_record_bootstrap", "false"},
    KeyDefault{"risk.knowledge", "high"},
    KeyDefault{"risk.prior", "grid"},
    KeyDefault{"risk.window", "10"},
    KeyDefault{"risk.grid", "21"},
    KeyDefault{"risk.metadata_level", ""},
    KeyDefault{"risk.mc_draws", "50"},
    KeyDefault{"risk.quasi_identifiers", "sex,race,marital,age,lon,lat"},
    KeyDefault{"risk.membership_known", "true"},
    KeyDefault{"infer.estimand", "mean:age"},
    KeyDefault{"infer.region", ""},
    KeyDefault{"infer.level", "0.95"},
    KeyDefault{"utility.estimands", ""},
    KeyDefault{"utility.outcome", ""},
    KeyDefault{"utility.predictors", ""},
    KeyDefault{"utility.plot", "true"},
    KeyDefault{"noise.seeds", "1,2,3"},
    KeyDefault{"noise.reps", "100"},
    KeyDefault{"noise.n", "2000"},
    KeyDefault{"noise.mse_limit", "3"},
};

// Line of each "section.key" in an INI file, for error messages.
std::map<std::string, int> key_lines(const std::string& path) {
  std::map<std::string, int> lines;
  std::ifstream in(path);
  std::string line;
  std::string section;
  for (int no = 1; std::getline(in, line); ++no) {
    std::string t = boost::algorithm::trim_copy(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = boost::algorithm::trim_copy(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = boost::algorithm::trim_copy(t.substr(0, eq));
    lines.emplace(section.empty() ? key : section + "." + key, no);
  }
  return lines;
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return !text.empty() && ec == std::errc() && ptr == last;
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& d : kDefaults) entries_[d.key] = {d.value, "default"};
}

void RunConfig::load_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.filename() + ":" + std::to_string(e.line()) + ": " +
                      e.message());
  }
  const auto lines = key_lines(path);
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      const auto it = lines.find(section);
      if (it == lines.end()) continue;  // empty section
      throw ConfigError(path + ":" + std::to_string(it->second) + ": key '" +
                        section + "' must be inside a section");
    }
    for (const auto& [key, leaf] : body) {
      const std::string full = section + "." + key;
      const auto it = lines.find(full);
      const std::string where =
          path + ":" + (it == lines.end() ? std::string("?") : std::to_string(it->second));
      if (!entries_.contains(full)) {
        throw ConfigError(where + ": unknown key '" + full + "'");
      }
      entries_[full] = {boost::algorithm::trim_copy(leaf.data()), where};
    }
  }
}

void RunConfig::set(const std::string& key, const std::string& value,
                    const std::string& origin) {
  if (!entries_.contains(key)) {
    throw ConfigError(origin + ": unknown key '" + key + "'");
  }
  entries_[key] = {value, origin};
}

const std::string& RunConfig::str(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("unknown key '" + key + "'");
  return it->second.value;
}

void RunConfig::fail(const std::string& key, const std::string& message) const {
  const auto it = entries_.find(key);
  const std::string origin = it == entries_.end() ? "?" : it->second.origin;
  throw ConfigError(origin + ": " + key + ": " + message);
}

std::uint64_t RunConfig::u64(const std::string& key) const {
  std::uint64_t v = 0;
  if (!parse_number(str(key), v)) {
    fail(key, "expected a non-negative integer, got '" + str(key) + "'");
  }
  return v;
}

std::size_t RunConfig::size(const std::string& key) const {
  return static_cast<std::size_t>(u64(key));
}

double RunConfig::real(const std::string& key) const {
  double v = 0;
  if (!parse_number(str(key), v) || !std::isfinite(v)) {
    fail(key, "expected a finite number, got '" + str(key) + "'");
  }
  return v;
}

bool RunConfig::flag(const std::string& key) const {
  const std::string& v = str(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(key, "expected true or false, got '" + v + "'");
}

std::vector<std::string> RunConfig::list(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(str(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    boost::algorithm::trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::uint64_t> RunConfig::u64_list(const std::string& key) const {
  std::vector<std::uint64_t> out;
  for (const auto& item : list(key)) {
    std::uint64_t v = 0;
    if (!parse_number(item, v)) fail(key, "'" + item + "' is not an integer");
    out.push_back(v);
  }
  return out;
}

std::string RunConfig::canonical() const {
  std::string out;
  for (const auto& [key, entry] : entries_) out += key + "=" + entry.value + "\n";
  return out;
}

std::string RunConfig::hash() const { return hex64(fnv1a(canonical())); }

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[i] = digits[v & 0xf];
  return out;
}

std::vector<std::string> documented_keys() {
  std::vector<std::string> out;
  for (const auto& d : kDefaults) out.push_back(std::string(d.key) + " = " + d.value);
  return out;
}

}  // namespace geosynth::cli

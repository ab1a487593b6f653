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

// Run configuration for the command-line tool: an INI file with sections,
// overridden by flags. Every key has a default; unknown keys are errors.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace geosynth::cli {

struct ConfigEntry {
  std::string value;
  // "default", "<file>:<line>" or "--flag".
  std::string origin = "default";
};

class RunConfig {
 public:
  // All keys at their defaults.
  RunConfig();

  // Merges an INI file. Throws ConfigError naming file and line for syntax
  // errors and unknown keys.
  void load_file(const std::string& path);
  // Sets "section.key". Throws ConfigError for unknown keys.
  void set(const std::string& key, const std::string& value,
           const std::string& origin);

  const std::string& str(const std::string& key) const;
  // Typed getters throw ConfigError quoting the key's origin.
  std::uint64_t u64(const std::string& key) const;
  std::size_t size(const std::string& key) const;
  double real(const std::string& key) const;
  bool flag(const std::string& key) const;
  // Comma-separated list; empty items are dropped.
  std::vector<std::string> list(const std::string& key) const;
  std::vector<std::uint64_t> u64_list(const std::string& key) const;

  const std::map<std::string, ConfigEntry>& entries() const { return entries_; }
  // "section.key=value" lines in key order.
  std::string canonical() const;
  // FNV-1a of canonical(), as 16 hex digits.
  std::string hash() const;

  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

 private:
  std::map<std::string, ConfigEntry> entries_;
};

// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t v);

// Key reference for the usage text: "section.key = default".
std::vector<std::string> documented_keys();

}  // namespace geosynth::cli

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

// Subcommand pipelines. Each writes its artifacts into the configured output
// directory together with manifest.json; on failure every file it created is
// removed again.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cli_config.hpp"
#include "geosynth/dataset.hpp"
#include "geosynth/utility.hpp"

namespace geosynth::cli {

// Files written by one run. Uncommitted files are deleted on destruction.
class Outputs {
 public:
  explicit Outputs(std::filesystem::path dir);
  ~Outputs();
  Outputs(const Outputs&) = delete;
  Outputs& operator=(const Outputs&) = delete;

  std::filesystem::path path(const std::string& name) const { return dir_ / name; }
  // CSV plus a "<stem>.schema.json" sidecar.
  void table(const std::string& name, const Dataset& ds);
  void text(const std::string& name, const std::string& contents);
  // Registers a file written by someone else.
  void adopt(const std::filesystem::path& file);
  void manifest(const RunConfig& config, const std::string& subcommand);
  void commit() { committed_ = true; }

 private:
  std::filesystem::path dir_;
  bool created_dir_ = false;
  bool committed_ = false;
  std::vector<std::filesystem::path> files_;
};

// Column-oriented builder for report tables. Text columns become
// categorical variables whose levels are the distinct values in order of
// first appearance.
class Table {
 public:
  Table& text(const std::string& name, std::vector<std::string> values);
  Table& num(const std::string& name, std::vector<double> values);
  Dataset build() const;

 private:
  struct Column {
    std::string name;
    bool is_text = false;
    std::vector<std::string> labels;
    std::vector<double> values;
  };
  std::vector<Column> columns_;
};

// "mean:VAR", "pct:VAR=LEVEL" or "above:VAR>THRESHOLD".
Estimand parse_estimand(const std::string& text);

// Returns the process exit status.
int run_simulate(const RunConfig& config);
int run_synth(const RunConfig& config);
int run_risk_geo(const RunConfig& config);
int run_risk_id(const RunConfig& config);
int run_infer(const RunConfig& config);
int run_utility(const RunConfig& config);
int run_noise_baseline(const RunConfig& config);

}  // namespace geosynth::cli

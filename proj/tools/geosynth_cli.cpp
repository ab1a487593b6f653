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

// geosynth: simulate, synthesize, and evaluate partially synthetic
// geocoded microdata.

#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli_commands.hpp"
#include "cli_config.hpp"
#include "geosynth/errors.hpp"

namespace {

using geosynth::cli::RunConfig;

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

// Flags shared by every subcommand, each bound to a config key.
const std::vector<Flag> kCommonFlags{
    {"--seed", "run.seed", "Root seed"},
    {"--out", "run.out", "Output directory"},
    {"--threads", "run.threads", "Worker threads (0 = all cores)"},
    {"--m", "synth.m", "Number of synthetic datasets"},
    {"--h", "synth.h", "Geography kernel bandwidth"},
    {"--input", "data.input", "Original data CSV"},
    {"--schema", "data.schema", "Schema JSON (default: <input stem>.schema.json)"},
    {"--release", "data.release", "Release directory written by synth"},
    {"--regions", "data.regions", "standard, grid:<nx>x<ny> or polygon CSV"},
};

struct Command {
  CLI::App* app;
  std::vector<Flag> flags;
  std::function<int(const RunConfig&)> run;
  std::string name;
};

std::string usage_footer() {
  std::string out = "\nConfig keys (section.key = default):\n";
  for (const auto& k : geosynth::cli::documented_keys()) out += "  " + k + "\n";
  out += "\nFlags override config keys; --set section.key=value overrides any key.\n";
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partially synthetic geocoded microdata: simulate, synthesize, evaluate"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.footer(usage_footer());
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flag_values;
  std::vector<Command> commands;

  auto add = [&](CLI::App* sub, std::vector<Flag> extra, std::function<int(const RunConfig&)> run,
                 std::string name) {
    sub->add_option("--config", config_path, "INI config file");
    sub->add_option("--set", sets, "Override: section.key=value (repeatable)");
    std::vector<Flag> flags = kCommonFlags;
    flags.insert(flags.end(), extra.begin(), extra.end());
    for (const auto& f : flags) sub->add_option(f.name, flag_values[f.name], f.help);
    commands.push_back({sub, std::move(flags), std::move(run), std::move(name)});
  };

  add(app.add_subcommand("simulate", "Draw a sample from the simulated population"),
      {{"--n", "simulate.n", "Sample size"},
       {"--outcome", "simulate.outcome", "Append a spatial binary outcome (true/false)"}},
      geosynth::cli::run_simulate, "simulate");
  add(app.add_subcommand("synth", "Write m partially synthetic datasets and metadata"),
      {{"--plan", "synth.plan", "geography or geography_age_race"},
       {"--level", "synth.metadata_level", "full, rules_only or empty"}},
      geosynth::cli::run_synth, "synth");

  CLI::App* risk = app.add_subcommand("risk", "Disclosure risk of a release");
  risk->require_subcommand(1);
  add(risk->add_subcommand("geo", "Geography recovery risk (R1, R2) per record"),
      {{"--knowledge", "risk.knowledge", "high or low"},
       {"--prior", "risk.prior", "grid or empirical"},
       {"--window", "risk.window", "Side of the grid prior window"},
       {"--level", "risk.metadata_level", "Metadata level assumed (default: release)"}},
      geosynth::cli::run_risk_geo, "risk geo");
  add(risk->add_subcommand("id", "Identification risk (expected, true, false match)"),
      {{"--mc", "risk.mc_draws", "Imputations per released dataset"},
       {"--level", "risk.metadata_level", "Metadata level assumed (default: release)"},
       {"--qi", "risk.quasi_identifiers", "Comma-separated known quasi-identifiers"}},
      geosynth::cli::run_risk_id, "risk id");

  add(app.add_subcommand("infer", "Combined inference from a release"),
      {{"--estimand", "infer.estimand",
        "mean:VAR, pct:VAR=LEVEL, above:VAR>T or logit:Y~X1+X2"},
       {"--region", "infer.region", "Restrict to one region"}},
      geosynth::cli::run_infer, "infer");
  add(app.add_subcommand("utility", "Compare a release with the original data"),
      {{"--outcome", "utility.outcome", "Binary outcome for the regression comparison"},
       {"--predictors", "utility.predictors", "Comma-separated regression predictors"}},
      geosynth::cli::run_utility, "utility");
  add(app.add_subcommand("noise-baseline", "Random-noise baseline against synthesis"),
      {{"--reps", "noise.reps", "Repetitions per seed"},
       {"--seeds", "noise.seeds", "Comma-separated seeds"},
       {"--n", "noise.n", "Sample size"}},
      geosynth::cli::run_noise_baseline, "noise-baseline");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  const Command* chosen = nullptr;
  for (const auto& c : commands) {
    if (c.app->parsed()) chosen = &c;
  }
  if (!chosen) {
    std::cerr << app.help();
    return 2;
  }

  try {
    RunConfig config;
    if (!config_path.empty()) config.load_file(config_path);
    for (const auto& f : chosen->flags) {
      if (chosen->app->count(f.name) > 0) config.set(f.key, flag_values[f.name], f.name);
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        throw geosynth::ConfigError("--set: expected section.key=value, got '" + s + "'");
      }
      config.set(s.substr(0, eq), s.substr(eq + 1), "--set");
    }
    return chosen->run(config);
  } catch (const geosynth::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

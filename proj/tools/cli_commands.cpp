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

#include "cli_commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <boost/version.hpp>
#include <json.hpp>

#include "geosynth/errors.hpp"
#include "geosynth/experiments.hpp"
#include "geosynth/inference.hpp"
#include "geosynth/risk.hpp"
#include "geosynth/synthesizer.hpp"

#ifndef GEOSYNTH_VERSION
#define GEOSYNTH_VERSION "0.0.0"
#endif

namespace geosynth::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string require(const RunConfig& config, const std::string& key) {
  const std::string& v = config.str(key);
  if (v.empty()) config.fail(key, "must be set");
  return v;
}

Dataset load_input(const RunConfig& config) {
  const std::string input = require(config, "data.input");
  std::string schema = config.str("data.schema");
  if (schema.empty()) {
    fs::path p(input);
    schema = (p.parent_path() / (p.stem().string() + ".schema.json")).string();
  }
  if (!fs::exists(input)) config.fail("data.input", "no such file '" + input + "'");
  if (!fs::exists(schema)) config.fail("data.schema", "no such file '" + schema + "'");
  return load_csv(input, load_schema(schema));
}

RegionMap load_regions(const RunConfig& config) {
  const std::string spec = config.str("data.regions");
  if (spec == "standard") return standard_regions();
  if (spec.starts_with("grid:")) {
    int nx = 0;
    int ny = 0;
    char x = 0;
    std::istringstream ss(spec.substr(5));
    if (!(ss >> nx >> x >> ny) || x != 'x' || nx <= 0 || ny <= 0) {
      config.fail("data.regions", "expected grid:<nx>x<ny>, got '" + spec + "'");
    }
    return RegionMap::grid(nx, ny, Extent{{0, 100}, {0, 100}});
  }
  if (!fs::exists(spec)) {
    config.fail("data.regions", "expected standard, grid:<nx>x<ny> or a polygon CSV");
  }
  return RegionMap::load_polygons_csv(spec);
}

MetadataLevel parse_level(const RunConfig& config, const std::string& key) {
  try {
    return parse_metadata_level(config.str(key));
  } catch (const Error& e) {
    config.fail(key, e.what());
  }
}

SynthesisPlan build_plan(const RunConfig& config, const Schema& schema) {
  const std::string kind = config.str("synth.plan");
  const double h = config.real("synth.h");
  SynthesisPlan plan;
  if (kind == "geography") {
    plan = SynthesisPlan::geography(schema, h, config.flag("synth.latitude_first"));
  } else if (kind == "geography_age_race") {
    for (const char* key : {"synth.age", "synth.race"}) {
      if (!schema.find(config.str(key))) {
        config.fail(key, "column '" + config.str(key) + "' is not in the schema");
      }
    }
    plan = SynthesisPlan::geography_age_race(schema, h, config.str("synth.age"),
                                             config.str("synth.race"),
                                             config.real("synth.h_age"));
  } else {
    config.fail("synth.plan", "expected geography or geography_age_race, got '" + kind + "'");
  }
  plan.m = config.size("synth.m");
  if (plan.m == 0) config.fail("synth.m", "must be at least 1");
  plan.seed = config.u64("run.seed");
  plan.threads = config.size("run.threads");
  plan.per_record_bootstrap = config.flag("synth.per_record_bootstrap");
  plan.tree_params.min_node_size = config.size("synth.min_node_size");
  plan.tree_params.min_dev_fraction = config.real("synth.min_dev_fraction");
  try {
    plan.validate(schema);
  } catch (const Error& e) {
    throw ConfigError(std::string("[synth]: ") + e.what());
  }
  return plan;
}

PriorSpec build_prior(const RunConfig& config) {
  PriorSpec prior;
  const std::string kind = config.str("risk.prior");
  if (kind == "grid") {
    prior.kind = PriorSpec::Kind::kUniformGrid;
  } else if (kind == "empirical") {
    prior.kind = PriorSpec::Kind::kEmpiricalSynthetic;
  } else {
    config.fail("risk.prior", "expected grid or empirical, got '" + kind + "'");
  }
  prior.window = config.real("risk.window");
  if (prior.window <= 0) config.fail("risk.window", "must be positive");
  const std::size_t g = config.size("risk.grid");
  if (g < 1) config.fail("risk.grid", "must be at least 1");
  prior.nx = prior.ny = static_cast<int>(g);
  return prior;
}

SyntheticRelease load_release_checked(const RunConfig& config, const Dataset& original) {
  const std::string dir = require(config, "data.release");
  if (!fs::is_directory(dir)) config.fail("data.release", "no such directory '" + dir + "'");
  SyntheticRelease rel = load_release(dir);
  if (!(rel.datasets.front().schema() == original.schema())) {
    config.fail("data.release", "release schema differs from the input schema");
  }
  if (rel.datasets.front().n_rows() != original.n_rows()) {
    config.fail("data.release", "release has " +
                                    std::to_string(rel.datasets.front().n_rows()) +
                                    " rows but the input has " +
                                    std::to_string(original.n_rows()));
  }
  return rel;
}

MetadataLevel scenario_level(const RunConfig& config, const SyntheticRelease& rel) {
  if (config.str("risk.metadata_level").empty()) return rel.metadata_level;
  const MetadataLevel level = parse_level(config, "risk.metadata_level");
  if (static_cast<int>(level) > static_cast<int>(rel.metadata_level)) {
    config.fail("risk.metadata_level",
                "release only discloses " + std::string(to_string(rel.metadata_level)));
  }
  return level;
}

fs::path out_dir(const RunConfig& config) { return require(config, "run.out"); }

void add_summary_row(std::vector<std::string>& names, std::vector<double> (&cols)[3],
                     const std::string& name, const QuantileSummary& q) {
  names.push_back(name);
  cols[0].push_back(q.alpha0);
  cols[1].push_back(q.alpha25);
  cols[2].push_back(q.alpha50);
}

Dataset descriptive_table(const std::vector<DescriptiveRow>& rows) {
  std::vector<std::string> est;
  std::vector<std::string> region;
  std::vector<double> q, med, mse, used, flagged;
  for (const auto& r : rows) {
    est.push_back(r.estimand);
    region.push_back(r.region);
    q.push_back(r.Q);
    med.push_back(r.median);
    mse.push_back(r.mse);
    used.push_back(static_cast<double>(r.reps_used));
    flagged.push_back(static_cast<double>(r.reps_flagged));
  }
  return Table()
      .text("estimand", est)
      .text("region", region)
      .num("Q", q)
      .num("median", med)
      .num("mse", mse)
      .num("reps_used", used)
      .num("reps_flagged", flagged)
      .build();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

Outputs::Outputs(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  if (!fs::exists(dir_)) {
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir_.string() + "'");
    created_dir_ = true;
  }
  if (!fs::is_directory(dir_)) {
    throw ConfigError("output path '" + dir_.string() + "' is not a directory");
  }
  const fs::path probe = dir_ / ".geosynth_write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw ConfigError("output directory '" + dir_.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

Outputs::~Outputs() {
  if (committed_) return;
  std::error_code ec;
  for (const auto& f : files_) fs::remove(f, ec);
  if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
}

void Outputs::table(const std::string& name, const Dataset& ds) {
  const fs::path csv = path(name);
  const fs::path sidecar = path(csv.stem().string() + ".schema.json");
  files_.push_back(csv);
  write_csv(csv.string(), ds);
  files_.push_back(sidecar);
  save_schema(sidecar.string(), ds.schema());
}

void Outputs::text(const std::string& name, const std::string& contents) {
  const fs::path p = path(name);
  files_.push_back(p);
  std::ofstream out(p, std::ios::binary);
  out << contents;
  if (!out) throw Error("cannot write '" + p.string() + "'");
}

void Outputs::adopt(const fs::path& file) {
  if (std::find(files_.begin(), files_.end(), file) == files_.end()) {
    files_.push_back(file);
  }
}

void Outputs::manifest(const RunConfig& config, const std::string& subcommand) {
  ordered_json doc;
  doc["tool"] = "geosynth";
  doc["version"] = GEOSYNTH_VERSION;
  doc["subcommand"] = subcommand;
  doc["seed"] = config.u64("run.seed");
  doc["config_hash"] = config.hash();
  ordered_json cfg = ordered_json::object();
  for (const auto& [key, entry] : config.entries()) cfg[key] = entry.value;
  doc["config"] = std::move(cfg);
  std::vector<fs::path> sorted = files_;
  std::sort(sorted.begin(), sorted.end());
  ordered_json files = ordered_json::array();
  for (const auto& f : sorted) {
    files.push_back({{"name", f.filename().string()}, {"fnv1a", hex64(fnv1a(read_file(f)))}});
  }
  doc["files"] = std::move(files);
  doc["versions"] = {
      {"compiler", __VERSION__},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"boost", BOOST_LIB_VERSION},
      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
      {"cli11", CLI11_VERSION},
  };
  text("manifest.json", doc.dump(2) + "\n");
}

Table& Table::text(const std::string& name, std::vector<std::string> values) {
  columns_.push_back({name, true, std::move(values), {}});
  return *this;
}

Table& Table::num(const std::string& name, std::vector<double> values) {
  columns_.push_back({name, false, {}, std::move(values)});
  return *this;
}

Dataset Table::build() const {
  std::vector<VariableSpec> vars;
  std::vector<std::vector<double>> cols;
  for (const auto& c : columns_) {
    VariableSpec v;
    v.name = c.name;
    if (c.is_text) {
      v.kind = VariableKind::kCategorical;
      std::vector<double> codes;
      for (const auto& label : c.labels) {
        auto it = std::find(v.levels.begin(), v.levels.end(), label);
        if (it == v.levels.end()) {
          v.levels.push_back(label);
          it = v.levels.end() - 1;
        }
        codes.push_back(static_cast<double>(it - v.levels.begin()));
      }
      if (v.levels.empty()) v.levels.push_back("none");
      cols.push_back(std::move(codes));
    } else {
      cols.push_back(c.values);
    }
    vars.push_back(std::move(v));
  }
  return Dataset(Schema(std::move(vars), false), std::move(cols));
}

Estimand parse_estimand(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw ConfigError("estimand '" + text + "' lacks a kind prefix");
  }
  const std::string kind = text.substr(0, colon);
  const std::string body = text.substr(colon + 1);
  Estimand e;
  e.name = text;
  if (kind == "mean") {
    e.kind = Estimand::Kind::kMean;
    e.variable = body;
  } else if (kind == "pct") {
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("estimand '" + text + "': expected pct:VAR=LEVEL");
    e.kind = Estimand::Kind::kPercentAt;
    e.variable = body.substr(0, eq);
    e.level = body.substr(eq + 1);
  } else if (kind == "above") {
    const auto gt = body.find('>');
    double t = 0;
    std::istringstream ss(gt == std::string::npos ? "" : body.substr(gt + 1));
    if (gt == std::string::npos || !(ss >> t) || !ss.eof()) {
      throw ConfigError("estimand '" + text + "': expected above:VAR>THRESHOLD");
    }
    e.kind = Estimand::Kind::kPercentAbove;
    e.variable = body.substr(0, gt);
    e.threshold = t;
  } else {
    throw ConfigError("estimand '" + text + "': unknown kind '" + kind + "'");
  }
  if (e.variable.empty()) throw ConfigError("estimand '" + text + "' names no variable");
  return e;
}

int run_simulate(const RunConfig& config) {
  const std::size_t n = config.size("simulate.n");
  if (n == 0) config.fail("simulate.n", "must be at least 1");
  PopulationSpec spec = PopulationSpec::standard();
  spec.include_autopsy = config.flag("simulate.autopsy");
  const std::uint64_t seed = config.u64("run.seed");
  Rng rng = make_stream(seed, {0, 0});
  Dataset ds = simulate_population(n, spec, rng);
  if (config.flag("simulate.outcome")) {
    Rng orng = make_stream(seed, {1, 0});
    const SurrogateOutcome y = generate_surrogate_outcome(ds, SurrogateOutcomeSpec{}, orng);
    ds = with_outcome(ds, require(config, "simulate.outcome_name"), y.y);
  }
  Outputs out(out_dir(config));
  out.table("sample.csv", ds);
  out.manifest(config, "simulate");
  out.commit();
  return 0;
}

int run_synth(const RunConfig& config) {
  const Dataset original = load_input(config);
  const SynthesisPlan plan = build_plan(config, original.schema());
  const MetadataLevel level = parse_level(config, "synth.metadata_level");
  const SyntheticRelease rel = generate_release(original, plan, level);
  Outputs out(out_dir(config));
  for (std::size_t l = 0; l < rel.m(); ++l) {
    // Registered before writing so a failure part-way still cleans up.
    out.adopt(out.path("synth_" + std::to_string(l + 1) + ".csv"));
  }
  out.adopt(out.path("schema.json"));
  out.adopt(out.path("metadata.json"));
  for (const auto& p : write_release(out.path("").string(), rel)) out.adopt(p);
  for (std::size_t l = 0; l < rel.m(); ++l) {
    const fs::path sidecar = out.path("synth_" + std::to_string(l + 1) + ".schema.json");
    out.adopt(sidecar);
    save_schema(sidecar.string(), original.schema());
  }
  out.manifest(config, "synth");
  out.commit();
  return 0;
}

int run_risk_geo(const RunConfig& config) {
  const Dataset original = load_input(config);
  const SyntheticRelease rel = load_release_checked(config, original);
  IntruderScenario scenario;
  const std::string knowledge = config.str("risk.knowledge");
  if (knowledge == "high") {
    scenario.knowledge = Knowledge::kHigh;
  } else if (knowledge == "low") {
    scenario.knowledge = Knowledge::kLow;
  } else {
    config.fail("risk.knowledge", "expected high or low, got '" + knowledge + "'");
  }
  scenario.metadata_level = scenario_level(config, rel);
  scenario.prior = build_prior(config);
  const std::vector<GeoRiskRecord> recs =
      geo_risk_all(rel, original, scenario, {}, config.size("run.threads"));

  std::vector<double> ids, r1, r2;
  for (const auto& r : recs) {
    ids.push_back(static_cast<double>(r.record_id));
    r1.push_back(r.r1);
    r2.push_back(static_cast<double>(r.r2));
  }
  std::vector<std::string> names;
  std::vector<double> q[3];
  add_summary_row(names, q, "R1", quantile_summary(r1));
  add_summary_row(names, q, "R2", quantile_summary(r2));

  Outputs out(out_dir(config));
  out.table("risk_geo_records.csv",
            Table().num("record_id", ids).num("R1", r1).num("R2", r2).build());
  out.table("risk_geo_summary.csv", Table()
                                        .text("measure", names)
                                        .num("alpha0", q[0])
                                        .num("alpha25", q[1])
                                        .num("alpha50", q[2])
                                        .build());
  out.manifest(config, "risk geo");
  out.commit();
  return 0;
}

int run_risk_id(const RunConfig& config) {
  const Dataset original = load_input(config);
  const SyntheticRelease rel = load_release_checked(config, original);
  IntruderScenario scenario;
  scenario.metadata_level = scenario_level(config, rel);
  scenario.known_quasi_identifiers = config.list("risk.quasi_identifiers");
  if (scenario.known_quasi_identifiers.empty()) {
    config.fail("risk.quasi_identifiers", "must list at least one column");
  }
  for (const auto& qi : scenario.known_quasi_identifiers) {
    if (!original.schema().find(qi)) {
      config.fail("risk.quasi_identifiers", "column '" + qi + "' is not in the schema");
    }
  }
  scenario.sample_membership_known = config.flag("risk.membership_known");
  const std::size_t mc = config.size("risk.mc_draws");
  if (mc == 0) config.fail("risk.mc_draws", "must be at least 1");

  const auto imputer = make_imputer(rel, scenario.metadata_level, mc);
  Rng rng = make_stream(config.u64("run.seed"),
                        {31, static_cast<std::uint64_t>(scenario.metadata_level)});
  const auto probs = match_probabilities(rel.datasets.front(), rel.plan, original, scenario,
                                         *imputer, rng, config.size("run.threads"));
  std::vector<std::optional<std::size_t>> truth(original.n_rows());
  for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = i;
  const MatchRiskSummary s = match_risk_summary(probs, truth);

  Outputs out(out_dir(config));
  out.table("risk_id_summary.csv",
            Table()
                .text("metadata_level", {std::string(to_string(scenario.metadata_level))})
                .num("expected", {s.expected})
                .num("true", {s.true_rate})
                .num("false", {s.false_rate.value_or(0)})
                .num("false_defined", {s.false_rate ? 1.0 : 0.0})
                .build());
  out.manifest(config, "risk id");
  out.commit();
  return 0;
}

int run_infer(const RunConfig& config) {
  const std::string dir = require(config, "data.release");
  if (!fs::is_directory(dir)) config.fail("data.release", "no such directory '" + dir + "'");
  const LoadedRelease rel = read_release(dir);
  const std::string spec = config.str("infer.estimand");
  const std::string region = config.str("infer.region");
  const double level = config.real("infer.level");
  if (!(level > 0 && level < 1)) config.fail("infer.level", "must lie in (0, 1)");

  std::vector<RowFilter> filters(rel.datasets.size());
  if (!region.empty()) {
    const RegionMap map = load_regions(config);
    const auto& labels = map.labels();
    if (std::find(labels.begin(), labels.end(), region) == labels.end()) {
      config.fail("infer.region", "no region '" + region + "' in the region map");
    }
    for (std::size_t l = 0; l < rel.datasets.size(); ++l) {
      const auto assigned = regions_of(rel.datasets[l], map);
      std::vector<bool> keep(assigned.size());
      for (std::size_t i = 0; i < assigned.size(); ++i) keep[i] = assigned[i] == region;
      filters[l] = std::move(keep);
    }
  }

  std::vector<std::string> terms;
  std::vector<MiEstimate> estimates;
  if (spec.starts_with("logit:")) {
    const auto tilde = spec.find('~');
    if (tilde == std::string::npos) config.fail("infer.estimand", "expected logit:Y~X1+X2");
    const std::string outcome = spec.substr(6, tilde - 6);
    const std::vector<std::string> predictors = split(spec.substr(tilde + 1), '+');
    std::vector<LogisticFit> fits;
    for (std::size_t l = 0; l < rel.datasets.size(); ++l) {
      const Dataset& d = rel.datasets[l];
      if (filters[l]) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < filters[l]->size(); ++i) {
          if ((*filters[l])[i]) rows.push_back(i);
        }
        fits.push_back(fit_logistic(d.select_rows(rows), outcome, predictors));
      } else {
        fits.push_back(fit_logistic(d, outcome, predictors));
      }
    }
    terms = fits.front().names;
    estimates = combine_logistic(fits);
  } else {
    Estimand e;
    try {
      e = parse_estimand(spec);
    } catch (const ConfigError& err) {
      config.fail("infer.estimand", err.what());
    }
    std::vector<ReplicateEstimate> reps;
    for (std::size_t l = 0; l < rel.datasets.size(); ++l) {
      reps.push_back(e.estimate(rel.datasets[l], filters[l]));
    }
    terms = {spec};
    estimates = {combine(reps)};
  }

  std::vector<double> m, qb, ub, bm, st, nu, inf, lo, hi;
  for (const auto& est : estimates) {
    const ConfidenceInterval ci = est.ci(level);
    m.push_back(static_cast<double>(est.m));
    qb.push_back(est.q_bar);
    ub.push_back(est.u_bar);
    bm.push_back(est.b_m);
    st.push_back(std::sqrt(est.T_m));
    const bool finite = std::isfinite(est.nu_m);
    nu.push_back(finite ? est.nu_m : std::numeric_limits<double>::max());
    inf.push_back(finite ? 0.0 : 1.0);
    lo.push_back(ci.lo);
    hi.push_back(ci.hi);
  }
  Outputs out(out_dir(config));
  out.table("infer.csv", Table()
                             .text("term", terms)
                             .text("region", std::vector<std::string>(
                                                 terms.size(), region.empty() ? "all" : region))
                             .num("m", m)
                             .num("q_bar", qb)
                             .num("u_bar", ub)
                             .num("b_m", bm)
                             .num("sqrt_T", st)
                             .num("nu", nu)
                             .num("nu_infinite", inf)
                             .num("ci_lo", lo)
                             .num("ci_hi", hi)
                             .build());
  out.manifest(config, "infer");
  out.commit();
  return 0;
}

int run_utility(const RunConfig& config) {
  const Dataset original = load_input(config);
  const std::string dir = require(config, "data.release");
  if (!fs::is_directory(dir)) config.fail("data.release", "no such directory '" + dir + "'");
  const LoadedRelease rel = read_release(dir);
  if (!(rel.schema == original.schema())) {
    config.fail("data.release", "release schema differs from the input schema");
  }
  const RegionMap regions = load_regions(config);

  std::vector<Estimand> estimands;
  for (const auto& text : config.list("utility.estimands")) {
    try {
      estimands.push_back(parse_estimand(text));
    } catch (const ConfigError& err) {
      config.fail("utility.estimands", err.what());
    }
  }
  if (estimands.empty()) estimands = standard_estimands();
  for (const auto& e : estimands) {
    if (!original.schema().find(e.variable)) {
      config.fail("utility.estimands", "column '" + e.variable + "' is not in the schema");
    }
  }

  Outputs out(out_dir(config));
  out.table("utility_descriptive.csv",
            descriptive_table(descriptive_comparison(original, {rel.datasets}, regions,
                                                     estimands)));

  const std::string outcome = config.str("utility.outcome");
  if (!outcome.empty()) {
    const std::vector<std::string> predictors = config.list("utility.predictors");
    if (predictors.empty()) config.fail("utility.predictors", "must be set with utility.outcome");
    const auto rows = regression_comparison(original, rel.datasets, outcome, predictors);
    std::vector<std::string> term;
    std::vector<double> q, se, qb, st;
    for (const auto& r : rows) {
      term.push_back(r.term);
      q.push_back(r.q);
      se.push_back(r.se);
      qb.push_back(r.q_bar);
      st.push_back(r.sqrt_T);
    }
    out.table("utility_regression.csv", Table()
                                            .text("term", term)
                                            .num("q", q)
                                            .num("se", se)
                                            .num("q_bar", qb)
                                            .num("sqrt_T", st)
                                            .build());
  }

  if (config.flag("utility.plot")) {
    const std::string race = config.str("synth.race");
    const auto group_col = original.schema().find(race);
    std::vector<std::string> source, group;
    std::vector<double> ids, x, y;
    auto add = [&](const Dataset& d, const std::string& name) {
      const std::size_t lon = d.schema().longitude();
      const std::size_t lat = d.schema().latitude();
      for (std::size_t i = 0; i < d.n_rows(); ++i) {
        source.push_back(name);
        ids.push_back(static_cast<double>(d.record_id(i)));
        x.push_back(d.value(i, lon));
        y.push_back(d.value(i, lat));
        group.push_back(group_col ? d.label(i, *group_col) : "all");
      }
    };
    add(original, "original");
    add(rel.datasets.front(), "synth_1");
    out.table("utility_plot.csv", Table()
                                      .text("source", source)
                                      .num("record_id", ids)
                                      .num("lon", x)
                                      .num("lat", y)
                                      .text("group", group)
                                      .build());
  }
  out.manifest(config, "utility");
  out.commit();
  return 0;
}

int run_noise_baseline(const RunConfig& config) {
  NoiseBaselineConfig nb;
  nb.seeds = config.u64_list("noise.seeds");
  if (nb.seeds.empty()) config.fail("noise.seeds", "must list at least one seed");
  nb.reps = config.size("noise.reps");
  if (nb.reps == 0) config.fail("noise.reps", "must be at least 1");
  nb.n = config.size("noise.n");
  if (nb.n == 0) config.fail("noise.n", "must be at least 1");
  nb.m = config.size("synth.m");
  if (nb.m == 0) config.fail("synth.m", "must be at least 1");
  nb.h = config.real("synth.h");
  nb.mse_limit = config.real("noise.mse_limit");
  nb.prior = build_prior(config);
  nb.threads = config.size("run.threads");
  const auto results = geosynth::run_noise_baseline(nb);

  std::vector<double> seed, q, nmed, nmse, smed, smse;
  std::vector<std::string> est, region;
  std::vector<double> sseed, r1, clipped, nabove, sabove;
  for (const auto& r : results) {
    for (std::size_t k = 0; k < r.noise.size(); ++k) {
      seed.push_back(static_cast<double>(r.seed));
      est.push_back(r.noise[k].estimand);
      region.push_back(r.noise[k].region);
      q.push_back(r.noise[k].Q);
      nmed.push_back(r.noise[k].median);
      nmse.push_back(r.noise[k].mse);
      smed.push_back(r.synthesis[k].median);
      smse.push_back(r.synthesis[k].mse);
    }
    sseed.push_back(static_cast<double>(r.seed));
    r1.push_back(r.median_r1);
    clipped.push_back(static_cast<double>(r.clipped));
    nabove.push_back(static_cast<double>(r.noise_above));
    sabove.push_back(static_cast<double>(r.synthesis_above));
  }
  Outputs out(out_dir(config));
  out.table("noise_baseline.csv", Table()
                                      .num("seed", seed)
                                      .text("estimand", est)
                                      .text("region", region)
                                      .num("Q", q)
                                      .num("noise_median", nmed)
                                      .num("noise_mse", nmse)
                                      .num("synthesis_median", smed)
                                      .num("synthesis_mse", smse)
                                      .build());
  out.table("noise_baseline_summary.csv", Table()
                                              .num("seed", sseed)
                                              .num("median_r1", r1)
                                              .num("clipped", clipped)
                                              .num("noise_above", nabove)
                                              .num("synthesis_above", sabove)
                                              .build());
  out.manifest(config, "noise-baseline");
  out.commit();
  return 0;
}

}  // namespace geosynth::cli

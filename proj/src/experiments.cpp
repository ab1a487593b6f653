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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "geosynth/errors.hpp"
#include "geosynth/experiments.hpp"
#include "geosynth/parallel.hpp"

namespace geosynth {
namespace {

// Distinct stream roots for samples, syntheses and attacks of one seed.
constexpr std::uint64_t kSampleTag = 0;
constexpr std::uint64_t kSynthesisRoot = 0x9e3779b97f4a7c15ULL;

std::uint64_t synthesis_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  Rng rng = make_stream(seed ^ kSynthesisRoot, {a, b});
  return rng();
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

std::vector<Estimand> percentage_estimands() {
  std::vector<Estimand> out;
  for (const auto& e : standard_estimands()) {
    if (e.is_percentage()) out.push_back(e);
  }
  return out;
}

}  // namespace

std::string_view to_string(PlanKind kind) {
  return kind == PlanKind::kGeography ? "geography" : "geography_age_race";
}

PlanKind parse_plan_kind(std::string_view text) {
  if (text == "geography" || text == "geo") return PlanKind::kGeography;
  if (text == "geography_age_race" || text == "geo_age_race") {
    return PlanKind::kGeographyAgeRace;
  }
  throw ConfigError("unknown synthesis plan '" + std::string(text) + "'");
}

SynthesisPlan make_plan(const Schema& schema, PlanKind kind, double h,
                        std::size_t m, std::uint64_t seed, double h_age) {
  SynthesisPlan plan = kind == PlanKind::kGeography
                           ? SynthesisPlan::geography(schema, h)
                           : SynthesisPlan::geography_age_race(schema, h, "age", "race", h_age);
  plan.m = m;
  plan.seed = seed;
  return plan;
}

std::vector<std::string> standard_quasi_identifiers() {
  return {"sex", "race", "marital", "age", "lon", "lat"};
}

Dataset simulated_sample(std::size_t n, std::uint64_t seed, std::uint64_t tag) {
  Rng rng = make_stream(seed, {kSampleTag, tag});
  return simulate_population(n, PopulationSpec::standard(), rng);
}

MatchRiskSummary identification_risk(const Dataset& original,
                                     const SyntheticRelease& release,
                                     MetadataLevel level, std::size_t mc_draws,
                                     std::uint64_t seed, std::size_t threads) {
  IntruderScenario scenario;
  scenario.metadata_level = level;
  scenario.known_quasi_identifiers = standard_quasi_identifiers();
  scenario.sample_membership_known = true;
  const auto imputer = make_imputer(release, level, mc_draws);
  Rng rng = make_stream(seed, {31, static_cast<std::uint64_t>(level)});
  const auto probs = match_probabilities(release.datasets.front(), release.plan, original,
                                         scenario, *imputer, rng, threads);
  std::vector<std::optional<std::size_t>> truth(original.n_rows());
  for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = i;
  return match_risk_summary(probs, truth);
}

std::vector<IdentificationRow> run_identification_experiment(
    const IdentificationConfig& config) {
  std::vector<IdentificationRow> rows;
  for (const std::uint64_t seed : config.seeds) {
    const Dataset ds = simulated_sample(config.n, seed);
    for (const PlanKind kind : {PlanKind::kGeography, PlanKind::kGeographyAgeRace}) {
      SynthesisPlan plan = make_plan(ds.schema(), kind, config.h, config.m,
                                     synthesis_seed(seed, 1, static_cast<std::uint64_t>(kind)));
      plan.threads = config.threads;
      const SyntheticRelease release = generate_release(ds, plan);
      for (const MetadataLevel level :
           {MetadataLevel::kFull, MetadataLevel::kRulesOnly, MetadataLevel::kEmpty}) {
        rows.push_back({seed, kind, level,
                        identification_risk(ds, release, level, config.mc_draws, seed,
                                            config.threads)});
      }
    }
  }
  return rows;
}

std::vector<GeoRiskRow> run_geo_risk_experiment(const GeoRiskConfig& config) {
  std::vector<GeoRiskRow> rows;
  for (const std::uint64_t seed : config.seeds) {
    const Dataset ds = simulated_sample(config.n, seed);
    for (std::size_t k = 0; k < config.bandwidths.size(); ++k) {
      const double h = config.bandwidths[k];
      SynthesisPlan plan = make_plan(ds.schema(), PlanKind::kGeography, h, config.m,
                                     synthesis_seed(seed, 2, k));
      plan.threads = config.threads;
      const SyntheticRelease release = generate_release(ds, plan);
      IntruderScenario scenario;
      scenario.knowledge = config.knowledge;
      scenario.prior = config.prior;
      const auto risk = geo_risk_all(release, ds, scenario, {}, config.threads);
      std::vector<double> r1, r2;
      for (const auto& r : risk) {
        r1.push_back(r.r1);
        r2.push_back(static_cast<double>(r.r2));
      }
      rows.push_back({seed, h, quantile_summary(r1), quantile_summary(r2)});
    }
  }
  return rows;
}

std::vector<AttenuationRow> run_attenuation_experiment(const AttenuationConfig& config) {
  const std::size_t nh = config.bandwidths.size();
  const std::size_t nt = config.terms.size();
  // values[r][k][t]
  std::vector<std::vector<std::vector<double>>> values(
      config.reps, std::vector<std::vector<double>>(nh, std::vector<double>(nt)));
  const std::vector<std::string> predictors{"sex", "race", "age"};
  parallel_for(config.reps, config.threads, [&](std::size_t r) {
    const Dataset sample = simulated_sample(config.n, config.seed, 100 + r);
    Rng rng = make_stream(config.seed, {7, r});
    const SurrogateOutcome y = generate_surrogate_outcome(sample, config.outcome, rng);
    const Dataset ds = with_outcome(sample, "y", y.y);
    for (std::size_t k = 0; k < nh; ++k) {
      SynthesisPlan plan = make_plan(ds.schema(), PlanKind::kGeographyAgeRace,
                                     config.bandwidths[k], config.m,
                                     synthesis_seed(config.seed, 3 + k, r));
      plan.threads = 1;
      const SyntheticRelease release = generate_release(ds, plan);
      std::vector<LogisticFit> fits;
      for (const Dataset& d : release.datasets) fits.push_back(fit_logistic(d, "y", predictors));
      const std::vector<MiEstimate> mi = combine_logistic(fits);
      for (std::size_t t = 0; t < nt; ++t) {
        const auto it = std::find(fits.front().names.begin(), fits.front().names.end(),
                                  config.terms[t]);
        if (it == fits.front().names.end()) {
          throw ConfigError("unknown regression term '" + config.terms[t] + "'");
        }
        values[r][k][t] = std::abs(mi[static_cast<std::size_t>(it - fits.front().names.begin())].q_bar);
      }
    }
  });
  std::vector<AttenuationRow> rows;
  for (std::size_t k = 0; k < nh; ++k) {
    for (std::size_t t = 0; t < nt; ++t) {
      AttenuationRow row;
      row.h = config.bandwidths[k];
      row.term = config.terms[t];
      for (std::size_t r = 0; r < config.reps; ++r) row.magnitudes.push_back(values[r][k][t]);
      row.median = median_of(row.magnitudes);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<CoverageResult> run_coverage_experiment(const CoverageConfig& config) {
  const RegionMap regions = standard_regions();
  const Estimand age{"avg age", Estimand::Kind::kMean, "age", "", 0};
  std::vector<CoverageResult> out;
  {
    const Dataset pop = simulated_sample(config.truth_population, config.seed, 999999);
    const auto labels = regions.assign_all(pop);
    for (const auto& region : regions.labels()) {
      std::vector<bool> keep(labels.size());
      for (std::size_t i = 0; i < labels.size(); ++i) keep[i] = labels[i] == region;
      out.push_back({region, age.estimate(pop, keep).q, 0, 0, 0});
    }
  }
  // hit[r][g]: 1 covered, 0 missed, -1 skipped.
  std::vector<std::vector<int>> hit(config.reps, std::vector<int>(out.size(), -1));
  parallel_for(config.reps, config.threads, [&](std::size_t r) {
    const Dataset ds = simulated_sample(config.n, config.seed, 1000 + r);
    SynthesisPlan plan = make_plan(ds.schema(), PlanKind::kGeography, config.h, config.m,
                                   synthesis_seed(config.seed, 20, r));
    plan.threads = 1;
    const SyntheticRelease release = generate_release(ds, plan);
    std::vector<std::vector<std::string>> labels;
    for (const auto& d : release.datasets) labels.push_back(regions.assign_all(d));
    for (std::size_t g = 0; g < out.size(); ++g) {
      std::vector<ReplicateEstimate> est;
      try {
        for (std::size_t l = 0; l < release.datasets.size(); ++l) {
          std::vector<bool> keep(labels[l].size());
          for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = labels[l][i] == out[g].region;
          est.push_back(age.estimate(release.datasets[l], keep));
        }
      } catch (const EmptyCellError&) {
        continue;
      }
      hit[r][g] = combine(est).ci(config.level).contains(out[g].truth) ? 1 : 0;
    }
  });
  for (std::size_t g = 0; g < out.size(); ++g) {
    for (std::size_t r = 0; r < config.reps; ++r) {
      if (hit[r][g] < 0) {
        ++out[g].skipped;
        continue;
      }
      ++out[g].reps;
      out[g].covered += static_cast<std::size_t>(hit[r][g]);
    }
  }
  return out;
}

std::vector<NoiseBaselineRow> run_noise_baseline(const NoiseBaselineConfig& config) {
  const RegionMap regions = standard_regions();
  const std::vector<Estimand> estimands = percentage_estimands();
  std::vector<NoiseBaselineRow> rows;
  for (const std::uint64_t seed : config.seeds) {
    NoiseBaselineRow row;
    row.seed = seed;
    const Dataset ds = simulated_sample(config.n, seed);
    SynthesisPlan base = make_plan(ds.schema(), PlanKind::kGeography, config.h, config.m,
                                   synthesis_seed(seed, 40));
    base.threads = config.threads;
    const SyntheticRelease risk_release = generate_release(ds, base);
    IntruderScenario scenario;
    scenario.prior = config.prior;
    const auto risk = geo_risk_all(risk_release, ds, scenario, {}, config.threads);
    std::vector<double> sd(risk.size());
    std::vector<double> r1(risk.size());
    for (std::size_t i = 0; i < risk.size(); ++i) {
      r1[i] = risk[i].r1;
      sd[i] = risk[i].r1 / std::sqrt(2.0);
    }
    row.median_r1 = median_of(r1);

    std::vector<std::vector<Dataset>> noise(config.reps);
    std::vector<std::vector<Dataset>> synth(config.reps);
    std::vector<std::size_t> clipped(config.reps, 0);
    parallel_for(config.reps, config.threads, [&](std::size_t r) {
      Rng rng = make_stream(seed, {50, r});
      NoisyGeography ng = add_geographic_noise(ds, sd, rng);
      clipped[r] = static_cast<std::size_t>(std::count(ng.clipped.begin(), ng.clipped.end(), true));
      noise[r].push_back(std::move(ng.data));
      SynthesisPlan plan = base;
      plan.seed = synthesis_seed(seed, 41, r);
      plan.threads = 1;
      synth[r] = generate_release(ds, plan).datasets;
    });
    for (std::size_t c : clipped) row.clipped += c;
    row.noise = descriptive_comparison(ds, noise, regions, estimands);
    row.synthesis = descriptive_comparison(ds, synth, regions, estimands);
    row.noise_above = count_mse_above(row.noise, config.mse_limit);
    row.synthesis_above = count_mse_above(row.synthesis, config.mse_limit);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace geosynth

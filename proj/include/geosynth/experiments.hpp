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

// Repeated-sampling experiments on simulated populations: identification
// risk by synthesis plan and metadata level, geography recovery by
// bandwidth, coefficient attenuation, interval coverage, and the
// random-noise baseline.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "geosynth/risk.hpp"
#include "geosynth/synthesizer.hpp"
#include "geosynth/utility.hpp"

namespace geosynth {

enum class PlanKind { kGeography, kGeographyAgeRace };

std::string_view to_string(PlanKind kind);
PlanKind parse_plan_kind(std::string_view text);

// Plan on the simulated-population columns.
SynthesisPlan make_plan(const Schema& schema, PlanKind kind, double h,
                        std::size_t m, std::uint64_t seed, double h_age = 2.0);

// Sex, race, marital status, age and both coordinates.
std::vector<std::string> standard_quasi_identifiers();

// Sample of n records drawn with make_stream(seed, {tag}).
Dataset simulated_sample(std::size_t n, std::uint64_t seed, std::uint64_t tag = 0);

// Every original record is a target whose true match is its own row, and
// the intruder knows which records were sampled.
MatchRiskSummary identification_risk(const Dataset& original,
                                     const SyntheticRelease& release,
                                     MetadataLevel level, std::size_t mc_draws,
                                     std::uint64_t seed, std::size_t threads = 0);

struct IdentificationRow {
  std::uint64_t seed = 0;
  PlanKind plan = PlanKind::kGeography;
  MetadataLevel level = MetadataLevel::kFull;
  MatchRiskSummary risk;
};

struct IdentificationConfig {
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::size_t n = 2000;
  double h = 1.0;
  std::size_t m = 5;
  std::size_t mc_draws = 50;
  std::size_t threads = 0;
};

// Both plans at all three metadata levels for each seed; the levels share
// one release per plan and seed.
std::vector<IdentificationRow> run_identification_experiment(
    const IdentificationConfig& config);

struct GeoRiskRow {
  std::uint64_t seed = 0;
  double h = 0;
  QuantileSummary r1;
  QuantileSummary r2;
};

struct GeoRiskConfig {
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<double> bandwidths{10, 5, 1};
  std::size_t n = 2000;
  std::size_t m = 5;
  Knowledge knowledge = Knowledge::kHigh;
  PriorSpec prior;
  std::size_t threads = 0;
};

// Geography-only synthesis at each bandwidth, all records as targets.
std::vector<GeoRiskRow> run_geo_risk_experiment(const GeoRiskConfig& config);

struct AttenuationRow {
  double h = 0;
  std::string term;
  // |q_bar| per rep.
  std::vector<double> magnitudes;
  double median = 0;
};

struct AttenuationConfig {
  std::uint64_t seed = 1;
  std::size_t reps = 20;
  std::size_t n = 2000;
  std::size_t m = 5;
  std::vector<double> bandwidths{1, 5, 10};
  SurrogateOutcomeSpec outcome;
  std::vector<std::string> terms{"race[black]", "age", "sex[male]"};
  std::size_t threads = 0;
};

// Each rep draws a new sample and spatial outcome, then synthesizes
// geography, age and race at every bandwidth and fits the nonspatial
// logistic regression of the outcome on sex, race and age.
std::vector<AttenuationRow> run_attenuation_experiment(const AttenuationConfig& config);

struct CoverageResult {
  std::string region;
  double truth = 0;
  std::size_t reps = 0;
  std::size_t covered = 0;
  // Reps where the region was empty in some dataset.
  std::size_t skipped = 0;
};

struct CoverageConfig {
  std::uint64_t seed = 1;
  std::size_t reps = 100;
  std::size_t n = 2000;
  std::size_t m = 5;
  double h = 1;
  std::size_t truth_population = 200000;
  double level = 0.95;
  std::size_t threads = 0;
};

// Mean age by region: truth from a large population, intervals from
// geography-only releases of fresh samples.
std::vector<CoverageResult> run_coverage_experiment(const CoverageConfig& config);

struct NoiseBaselineRow {
  std::uint64_t seed = 0;
  std::vector<DescriptiveRow> noise;
  std::vector<DescriptiveRow> synthesis;
  std::size_t noise_above = 0;
  std::size_t synthesis_above = 0;
  double median_r1 = 0;
  std::size_t clipped = 0;
};

struct NoiseBaselineConfig {
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::size_t reps = 100;
  std::size_t n = 2000;
  std::size_t m = 5;
  double h = 1;
  double mse_limit = 3;
  PriorSpec prior;
  std::size_t threads = 0;
};

// Noise with per-record sd R1_i / sqrt(2), R1_i from the high-knowledge
// posterior under geography-only synthesis at bandwidth h, against
// geography-only synthesis at h. Percentage estimands only.
std::vector<NoiseBaselineRow> run_noise_baseline(const NoiseBaselineConfig& config);

}  // namespace geosynth

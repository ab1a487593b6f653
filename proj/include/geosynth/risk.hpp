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

// Disclosure risk of a synthetic release.
//
// Geography recovery: an intruder forms a posterior over a target's true
// location and is scored by R1, the root mean squared distance of that
// posterior from the truth, and R2, the number of original records inside
// the circle of radius R1 around the truth.
//
// Under the high-knowledge scenario the intruder knows every original value
// except the target's location, plus the tree structure used for the first
// two planned (geographic) variables. Each candidate location s on a grid
// is scored by the likelihood of the target's m synthetic locations:
//
//   L(s) = prod_l f1(g1~_l | s) * f2(g2~_l | s)
//
// where f1 is the equal-weight mixture of truncated Gaussian kernels over
// the values in the target's leaf of the first tree, with the target's value
// replaced by the candidate, and f2 is the same mixture for the second tree
// at the node that drew g2~_l. Node memberships, value ranges and predictor
// supports are recomputed under the candidate; the splits are held fixed.
// With h = 0, or when a node's range collapses to a point, the kernels
// become point masses and any candidate with more point-mass factors
// dominates.
//
// Under the low-knowledge scenario the posterior is the target's m
// synthetic locations, each smoothed by a 5x5 Gauss-Hermite stencil with
// standard deviation equal to the bandwidth and cut to the recoded domain.
//
// Identification: an intruder holding the true quasi-identifiers of each
// target imputes the synthesized values of every released record, keeps the
// records that agree exactly on the unsynthesized identifiers, and among
// them picks those with the fewest categorical mismatches and then the
// smallest Euclidean distance over the synthesized continuous identifiers.
// Ties share probability equally; probabilities are averaged over the
// imputations.

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geosynth/cart.hpp"
#include "geosynth/dataset.hpp"
#include "geosynth/geometry.hpp"
#include "geosynth/random.hpp"
#include "geosynth/synthesizer.hpp"

namespace geosynth {

enum class Knowledge { kLow, kHigh };

struct PriorSpec {
  enum class Kind { kUniformGrid, kEmpiricalSynthetic };
  Kind kind = Kind::kUniformGrid;
  // Square window centred on the true location, used when `extent` is unset.
  double window = 10.0;
  int nx = 21;
  int ny = 21;
  std::optional<Extent> extent;
};

struct IntruderScenario {
  Knowledge knowledge = Knowledge::kHigh;
  MetadataLevel metadata_level = MetadataLevel::kFull;
  PriorSpec prior;
  std::vector<std::string> known_quasi_identifiers;
  bool sample_membership_known = true;

  // Throws ConfigError for a high-knowledge scenario without tree structure
  // or a malformed prior.
  void validate() const;
};

struct GeoPosterior {
  std::vector<Point> support;
  std::vector<double> weights;
  // Set when every candidate had zero likelihood and the prior was used.
  bool degenerate = false;
};

// Grid candidates in the recoded domain; points outside [1, 100]^2 are
// dropped.
std::vector<Point> prior_grid(const PriorSpec& prior, Point truth);

// Posterior over the location of original row `target`. The release must
// carry trees for the first two planned variables, which must be the
// coordinates; redacted trees are refilled from `original`.
GeoPosterior geo_posterior(const SyntheticRelease& release,
                           const Dataset& original, std::size_t target,
                           const IntruderScenario& scenario);

struct GeoRiskRecord {
  std::int64_t record_id = 0;
  double r1 = 0;
  std::size_t r2 = 0;
};

GeoRiskRecord geo_risk(const GeoPosterior& posterior, Point truth,
                       const Dataset& original, std::int64_t record_id = 0);

// Posterior and risk for each listed row (all rows when empty), computed
// concurrently.
std::vector<GeoRiskRecord> geo_risk_all(const SyntheticRelease& release,
                                        const Dataset& original,
                                        const IntruderScenario& scenario,
                                        std::span<const std::size_t> rows = {},
                                        std::size_t threads = 0);

// Order statistics at 0, 25 and 50 percent (linear interpolation).
struct QuantileSummary {
  double alpha0 = 0;
  double alpha25 = 0;
  double alpha50 = 0;
};

QuantileSummary quantile_summary(std::vector<double> values);

// Imputations of the synthesized variables of every released record.
class Imputer {
 public:
  virtual ~Imputer() = default;
  virtual std::size_t size() const = 0;
  virtual double weight(std::size_t /*index*/) const {
    return 1.0 / static_cast<double>(size());
  }
  // out[k][j]: value of the k-th planned variable for record j. Imputations
  // are requested in index order.
  virtual std::vector<std::vector<double>> impute(std::size_t index,
                                                  Rng& rng) const = 0;
};

// Each record's own synthetic values in each released dataset.
std::unique_ptr<Imputer> make_released_values_imputer(
    const SyntheticRelease& release);

// Values drawn uniformly from the synthetic values that the released
// datasets place in each tree node. Records are routed with their imputed
// earlier variables; the nearest non-empty ancestor pool is used.
std::unique_ptr<Imputer> make_node_pool_imputer(
    const SyntheticRelease& release, std::size_t mc_draws);

// The synthesizer itself run with zero bandwidth on the fitted trees.
std::unique_ptr<Imputer> make_tree_atom_imputer(const SyntheticRelease& release,
                                                std::size_t mc_draws);

// Imputer matching the scenario's metadata level.
std::unique_ptr<Imputer> make_imputer(const SyntheticRelease& release,
                                      MetadataLevel level,
                                      std::size_t mc_draws = 50);

// Match probabilities for every row of `targets` (which must carry the known
// quasi-identifiers by name). Each vector has n + 1 entries; the last is the
// probability that the target is not in the release.
std::vector<std::vector<double>> match_probabilities(
    const Dataset& released, const SynthesisPlan& plan, const Dataset& targets,
    const IntruderScenario& scenario, const Imputer& imputer, Rng& rng,
    std::size_t threads = 0);

struct MatchRiskSummary {
  double expected = 0;
  double true_rate = 0;
  std::optional<double> false_rate;
};

// truth[t] is the released row of target t, if any.
MatchRiskSummary match_risk_summary(
    const std::vector<std::vector<double>>& probabilities,
    std::span<const std::optional<std::size_t>> truth);

// Summary from per-target tie counts c and hit indicators g.
MatchRiskSummary match_risk_from_counts(std::span<const std::size_t> c,
                                        std::span<const int> g);

}  // namespace geosynth

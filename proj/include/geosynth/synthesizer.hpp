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

// Sequential CART synthesis of selected columns.
//
// Each synthesized variable gets one tree, fit once on the original data
// with the true values of its predictors. The predictors of the k-th planned
// variable are every unplanned variable plus the planned variables before
// it. To draw a synthetic value for a record, the record is routed down the
// tree using the synthetic values already drawn for earlier planned
// variables; when these fall outside the support observed at the leaf, the
// search moves up toward the root until a node covers them. Within that
// node, a Bayesian-bootstrap distribution over the node's values picks an
// atom, and continuous variables add Gaussian kernel noise truncated to the
// node's value range.

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "geosynth/cart.hpp"
#include "geosynth/dataset.hpp"
#include "geosynth/geometry.hpp"
#include "geosynth/random.hpp"

namespace geosynth {

struct SynthesisPlan {
  // Variables to synthesize, in order.
  std::vector<std::string> order;
  // Kernel bandwidth per continuous planned variable, in data units.
  std::map<std::string, double> bandwidths;
  std::size_t m = 5;
  cart::FitParams tree_params;
  std::uint64_t seed = 0;
  // Redraw the bootstrap weights for every record instead of once per node.
  bool per_record_bootstrap = false;
  // Worker threads for replicate generation; 0 means hardware concurrency.
  std::size_t threads = 0;

  // Throws ConfigError if the plan does not fit the schema.
  void validate(const Schema& schema) const;
  double bandwidth(const std::string& name) const;

  // Longitude then latitude with h_lambda = h_phi = h.
  static SynthesisPlan geography(const Schema& schema, double h,
                                 bool latitude_first = false);
  // Geography, then age (bandwidth h_age), then race.
  static SynthesisPlan geography_age_race(const Schema& schema, double h,
                                          const std::string& age,
                                          const std::string& race,
                                          double h_age = 2.0);
};

// Predictor names used for the plan's k-th variable.
std::vector<std::string> conditioning_set(const Schema& schema,
                                          const SynthesisPlan& plan,
                                          std::size_t k);

// Dirichlet(1, ..., 1) weights over k atoms realized as the gaps between
// k - 1 sorted uniforms.
class BootstrapWeights {
 public:
  static BootstrapWeights draw(std::size_t k, Rng& rng);

  std::size_t size() const { return cumulative_.size(); }
  // Cumulative probabilities; the last entry is exactly 1.
  std::span<const double> cumulative() const { return cumulative_; }
  std::vector<double> probabilities() const;
  // Index of one atom drawn from the weights.
  std::size_t sample(Rng& rng) const;

 private:
  std::vector<double> cumulative_;
};

// `count` i.i.d. draws from the Bayesian-bootstrap distribution over
// `values`.
std::vector<double> bayesian_bootstrap(std::span<const double> values,
                                       std::size_t count, Rng& rng);

// Normal(center, h^2) truncated to `support`, drawn by inversion. h = 0
// returns center.
double kernel_sample(double center, double h, Interval support, Rng& rng);

struct ColumnDraw {
  std::vector<double> values;
  // Id of the node each value was drawn from.
  std::vector<int> nodes;
};

// Draws one synthetic column from a fitted tree. `base` supplies the
// unsynthesized values of every record; `already_synthesized` maps column
// index to the synthetic values drawn so far and overrides `base` when
// routing.
ColumnDraw sample_column(const Dataset& base, const cart::CartTree& tree,
                         const std::map<std::size_t, std::vector<double>>&
                             already_synthesized,
                         double h, bool per_record_bootstrap, Rng& rng);

// Fits the tree on `ds` and draws one column.
std::vector<double> synthesize_column(
    const Dataset& ds, const std::string& target,
    const std::vector<std::string>& predictors,
    const std::map<std::size_t, std::vector<double>>& already_synthesized,
    double h, const cart::FitParams& tree_params, Rng& rng);

struct SyntheticRelease {
  std::vector<Dataset> datasets;
  SynthesisPlan plan;
  MetadataLevel metadata_level = MetadataLevel::kFull;
  // Aligned with plan.order.
  std::vector<std::shared_ptr<const cart::CartTree>> trees;
  // generating_nodes[l][k][i]: node that produced record i's value of the
  // k-th planned variable in replicate l.
  std::vector<std::vector<std::vector<int>>> generating_nodes;

  std::size_t m() const { return datasets.size(); }
};

// Fits one tree per planned variable on `original`.
std::vector<std::shared_ptr<const cart::CartTree>> fit_plan_trees(
    const Dataset& original, const SynthesisPlan& plan);

struct Replicate {
  Dataset data;
  std::vector<std::vector<int>> nodes;
};

// One replicate drawn with the given trees; `base` supplies unsynthesized
// columns.
Replicate draw_replicate(
    const Dataset& base, const SynthesisPlan& plan,
    const std::vector<std::shared_ptr<const cart::CartTree>>& trees, Rng& rng);

// m replicates; replicate l (0-based) uses make_stream(plan.seed, {l}).
SyntheticRelease generate_release(const Dataset& original,
                                  const SynthesisPlan& plan,
                                  MetadataLevel level = MetadataLevel::kFull);

// Writes synth_1.csv .. synth_m.csv, schema.json and metadata.json.
// Returns the paths written.
std::vector<std::string> write_release(const std::string& dir,
                                       const SyntheticRelease& release);

struct LoadedRelease {
  Schema schema;
  std::vector<Dataset> datasets;
  std::string metadata_json;
};

LoadedRelease read_release(const std::string& dir);

// Release with plan order, bandwidths, metadata level and trees restored from
// metadata.json. Generating nodes are not stored and come back empty.
SyntheticRelease load_release(const std::string& dir);

}  // namespace geosynth

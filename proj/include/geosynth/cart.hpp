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

// Binary regression/classification trees grown by greedy deviance
// reduction, without pruning.
//
// Splits minimize the summed deviance of the two children over every
// admissible split of every predictor. Numeric thresholds sit at midpoints
// between adjacent distinct values and send `value < threshold` left.
// Categorical predictors are split by ordering the levels present at the node
// (by mean response, or by the share of the first response level for
// classification) and scanning the ordered prefixes; the chosen prefix goes
// left and any other level, including one never seen in training, goes
// right. Score ties are broken by predictor order and then by threshold.
//
// Growth at a node stops when it is pure, when its deviance falls below
// min_dev_fraction times the root deviance (or below min_dev_fraction itself
// with absolute_min_dev), when it holds fewer than 2 * min_node_size rows, or
// when no admissible split strictly reduces the deviance.

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geosynth/dataset.hpp"

namespace geosynth {

// How much of the synthesis model is disclosed alongside a release.
enum class MetadataLevel { kEmpty, kRulesOnly, kFull };

std::string_view to_string(MetadataLevel level);
MetadataLevel parse_metadata_level(std::string_view text);

namespace cart {

struct FitParams {
  std::size_t min_node_size = 5;
  double min_dev_fraction = 1e-4;
  bool absolute_min_dev = false;
};

enum class ResponseKind { kRegression, kClassification };

// Regression: sum of squared deviations from the mean. Classification (level
// codes in [0, n_levels)): -2 sum_k n_k log(n_k / n) with 0 log 0 = 0.
double node_deviance(std::span<const double> values, ResponseKind kind,
                     std::size_t n_levels = 0);

struct SplitRule {
  enum class Kind { kThreshold, kSubset };

  // Dataset column index of the split variable.
  std::size_t variable = 0;
  Kind kind = Kind::kThreshold;
  double threshold = 0;
  // Sorted level codes routed left.
  std::vector<int> left_levels;

  bool goes_left(double value) const;
};

// Observed values of one predictor among a node's member rows.
struct PredictorSupport {
  double lo = 0;
  double hi = 0;
  // Sorted distinct level codes; categorical predictors only.
  std::vector<int> levels;

  bool contains(double value, bool categorical) const;
};

struct CartNode {
  int id = 0;
  int parent = -1;
  int left = -1;
  int right = -1;
  int depth = 0;
  std::optional<SplitRule> rule;
  std::vector<std::size_t> member_rows;
  double deviance = 0;
  // Response values of the member rows, in member order.
  std::vector<double> values;
  double value_min = 0;
  double value_max = 0;
  // Aligned with CartTree::predictors().
  std::vector<PredictorSupport> support;

  bool is_leaf() const { return !rule.has_value(); }
};

using SupportCheck =
    std::function<bool(const CartNode& node, std::span<const double> record)>;

class CartTree {
 public:
  CartTree(std::size_t response, std::string response_name, ResponseKind kind,
           std::size_t n_levels, std::vector<std::size_t> predictors,
           std::vector<std::string> predictor_names,
           std::vector<bool> predictor_categorical, FitParams params,
           std::vector<CartNode> nodes);

  std::size_t response() const { return response_; }
  const std::string& response_name() const { return response_name_; }
  ResponseKind kind() const { return kind_; }
  std::size_t n_levels() const { return n_levels_; }
  const std::vector<std::size_t>& predictors() const { return predictors_; }
  const std::vector<std::string>& predictor_names() const {
    return predictor_names_;
  }
  bool predictor_is_categorical(std::size_t p) const {
    return predictor_categorical_[p];
  }
  // Position of a dataset column within predictors(), if it is one.
  std::optional<std::size_t> predictor_slot(std::size_t column) const;
  const FitParams& params() const { return params_; }

  const std::vector<CartNode>& nodes() const { return nodes_; }
  const CartNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const CartNode& root() const { return nodes_.front(); }
  std::vector<int> leaf_ids() const;

  // `record` holds one value per dataset column.
  const CartNode& find_leaf(std::span<const double> record) const;
  // Descends to the leaf, then walks toward the root until `check` passes.
  // The root is returned when no node passes.
  const CartNode& find_leaf_with_fallback(std::span<const double> record,
                                          const SupportCheck& check) const;
  // Path of node ids from the root to the leaf reached by `record`.
  std::vector<int> path(std::span<const double> record) const;

 private:
  std::size_t response_;
  std::string response_name_;
  ResponseKind kind_;
  std::size_t n_levels_;
  std::vector<std::size_t> predictors_;
  std::vector<std::string> predictor_names_;
  std::vector<bool> predictor_categorical_;
  FitParams params_;
  std::vector<CartNode> nodes_;
};

// A categorical response yields a classification tree, a continuous one a
// regression tree. A constant response or an empty predictor list gives a
// root-only tree.
CartTree fit_tree(const Dataset& ds, std::string_view response,
                  std::span<const std::string> predictors,
                  const FitParams& params = {});

// JSON text form. kFull carries rules, node value multisets (sorted) and
// predictor supports; kRulesOnly carries the rules and tree shape only. The
// bandwidth used with the tree is recorded at both levels.
std::string tree_to_json(const CartTree& tree, const Schema& schema,
                         MetadataLevel level, double bandwidth);
// Rebuilds a tree from tree_to_json output. Redacted trees come back with
// empty value multisets and supports.
CartTree tree_from_json(std::string_view text, const Schema& schema);

// Same rules and shape as `shape`, with members, values, deviances and
// supports recomputed by routing every row of `ds`.
CartTree refill_tree(const CartTree& shape, const Dataset& ds);

}  // namespace cart
}  // namespace geosynth

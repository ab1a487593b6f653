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

#include "geosynth/cart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "geosynth/errors.hpp"

namespace geosynth {

std::string_view to_string(MetadataLevel level) {
  switch (level) {
    case MetadataLevel::kEmpty:
      return "EMPTY";
    case MetadataLevel::kRulesOnly:
      return "RULES_ONLY";
    case MetadataLevel::kFull:
      return "FULL";
  }
  return "EMPTY";
}

MetadataLevel parse_metadata_level(std::string_view text) {
  if (text == "EMPTY" || text == "empty") return MetadataLevel::kEmpty;
  if (text == "RULES_ONLY" || text == "rules_only" || text == "rules") {
    return MetadataLevel::kRulesOnly;
  }
  if (text == "FULL" || text == "full") return MetadataLevel::kFull;
  throw ConfigError("unknown metadata level '" + std::string(text) + "'");
}

namespace cart {
namespace {

double xlogx(double x) { return x > 0 ? x * std::log(x) : 0.0; }

double regression_deviance(std::span<const double> v) {
  if (v.empty()) return 0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double acc = 0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc;
}

double classification_deviance(std::span<const double> v,
                               std::size_t n_levels) {
  std::vector<double> counts(n_levels, 0.0);
  for (double x : v) {
    const auto k = static_cast<std::size_t>(x);
    if (k >= counts.size()) counts.resize(k + 1, 0.0);
    counts[k] += 1;
  }
  double acc = 0;
  for (double c : counts) acc += xlogx(c);
  const double dev = -2.0 * (acc - xlogx(static_cast<double>(v.size())));
  return dev > 0 ? dev : 0.0;
}

struct Candidate {
  double score = std::numeric_limits<double>::infinity();
  SplitRule rule;
  bool found = false;
};

// Member rows, values, deviance and predictor supports of one node.
void fill_node_stats(CartNode& node, const Dataset& ds,
                     std::span<const double> y, ResponseKind kind,
                     std::size_t n_levels,
                     const std::vector<std::size_t>& predictors,
                     std::vector<std::size_t> rows) {
  node.values.clear();
  node.values.reserve(rows.size());
  for (std::size_t r : rows) node.values.push_back(y[r]);
  node.deviance = node_deviance(node.values, kind, n_levels);
  if (node.values.empty()) {
    node.value_min = node.value_max = 0;
  } else {
    auto [lo, hi] = std::minmax_element(node.values.begin(), node.values.end());
    node.value_min = *lo;
    node.value_max = *hi;
  }
  node.support.assign(predictors.size(), PredictorSupport{});
  for (std::size_t p = 0; p < predictors.size(); ++p) {
    const std::size_t col = predictors[p];
    PredictorSupport& s = node.support[p];
    s.lo = std::numeric_limits<double>::infinity();
    s.hi = -std::numeric_limits<double>::infinity();
    for (std::size_t r : rows) {
      const double v = ds.value(r, col);
      s.lo = std::min(s.lo, v);
      s.hi = std::max(s.hi, v);
    }
    if (ds.schema()[col].is_categorical()) {
      for (std::size_t r : rows) s.levels.push_back(ds.code(r, col));
      std::sort(s.levels.begin(), s.levels.end());
      s.levels.erase(std::unique(s.levels.begin(), s.levels.end()),
                     s.levels.end());
    }
  }
  node.member_rows = std::move(rows);
}

// Growing context shared across nodes.
class Grower {
 public:
  Grower(const Dataset& ds, std::size_t response, ResponseKind kind,
         std::size_t n_levels, const std::vector<std::size_t>& predictors,
         const FitParams& params)
      : ds_(ds),
        y_(ds.column(response)),
        kind_(kind),
        n_levels_(n_levels),
        predictors_(predictors),
        params_(params) {}

  std::vector<CartNode> grow() {
    std::vector<std::size_t> all(ds_.n_rows());
    std::iota(all.begin(), all.end(), std::size_t{0});
    struct Pending {
      std::vector<std::size_t> rows;
      int parent;
      bool is_left;
      int depth;
    };
    std::vector<Pending> stack;
    stack.push_back({std::move(all), -1, false, 0});
    bool first = true;
    while (!stack.empty()) {
      Pending job = std::move(stack.back());
      stack.pop_back();
      const int id = static_cast<int>(nodes_.size());
      nodes_.push_back(make_node(id, job.parent, job.depth, std::move(job.rows)));
      if (job.parent >= 0) {
        CartNode& p = nodes_[static_cast<std::size_t>(job.parent)];
        (job.is_left ? p.left : p.right) = id;
      }
      if (first) {
        root_deviance_ = nodes_.front().deviance;
        first = false;
      }
      CartNode& node = nodes_.back();
      if (!should_try_split(node)) continue;
      Candidate best = best_split(node.member_rows, node.deviance);
      if (!best.found) continue;
      std::vector<std::size_t> left;
      std::vector<std::size_t> right;
      for (std::size_t r : node.member_rows) {
        (best.rule.goes_left(ds_.value(r, best.rule.variable)) ? left : right)
            .push_back(r);
      }
      node.rule = std::move(best.rule);
      // Right is pushed first so that ids are assigned in preorder.
      stack.push_back({std::move(right), id, false, node.depth + 1});
      stack.push_back({std::move(left), id, true, node.depth + 1});
    }
    return std::move(nodes_);
  }

 private:
  CartNode make_node(int id, int parent, int depth,
                     std::vector<std::size_t> rows) const {
    CartNode node;
    node.id = id;
    node.parent = parent;
    node.depth = depth;
    fill_node_stats(node, ds_, y_, kind_, n_levels_, predictors_, std::move(rows));
    return node;
  }

  bool should_try_split(const CartNode& node) const {
    if (predictors_.empty()) return false;
    if (node.member_rows.size() < 2 * std::max<std::size_t>(params_.min_node_size, 1)) {
      return false;
    }
    if (node.deviance <= 0) return false;
    const double floor = params_.absolute_min_dev
                             ? params_.min_dev_fraction
                             : params_.min_dev_fraction * root_deviance_;
    return !(node.deviance < floor);
  }

  // Deviance of a group from running statistics. Regression uses sums of
  // values centered at the node mean.
  struct Stats {
    double n = 0;
    double sum = 0;
    double sumsq = 0;
    std::vector<double> counts;
  };

  double stats_deviance(const Stats& s) const {
    if (kind_ == ResponseKind::kRegression) {
      if (s.n <= 0) return 0;
      const double d = s.sumsq - s.sum * s.sum / s.n;
      return d > 0 ? d : 0.0;
    }
    double acc = 0;
    for (double c : s.counts) acc += xlogx(c);
    const double d = -2.0 * (acc - xlogx(s.n));
    return d > 0 ? d : 0.0;
  }

  void add(Stats& s, double y, double center) const {
    s.n += 1;
    if (kind_ == ResponseKind::kRegression) {
      const double c = y - center;
      s.sum += c;
      s.sumsq += c * c;
    } else {
      s.counts[static_cast<std::size_t>(y)] += 1;
    }
  }

  void remove(Stats& s, double y, double center) const {
    s.n -= 1;
    if (kind_ == ResponseKind::kRegression) {
      const double c = y - center;
      s.sum -= c;
      s.sumsq -= c * c;
    } else {
      s.counts[static_cast<std::size_t>(y)] -= 1;
    }
  }

  Stats empty_stats() const {
    Stats s;
    if (kind_ == ResponseKind::kClassification) s.counts.assign(n_levels_, 0.0);
    return s;
  }

  Candidate best_split(const std::vector<std::size_t>& rows,
                       double node_dev) const {
    const std::size_t min_size = std::max<std::size_t>(params_.min_node_size, 1);
    double center = 0;
    if (kind_ == ResponseKind::kRegression) {
      for (std::size_t r : rows) center += y_[r];
      center /= static_cast<double>(rows.size());
    }
    Stats total = empty_stats();
    for (std::size_t r : rows) add(total, y_[r], center);

    Candidate best;
    for (std::size_t p = 0; p < predictors_.size(); ++p) {
      const std::size_t col = predictors_[p];
      if (ds_.schema()[col].is_categorical()) {
        consider_categorical(rows, col, center, total, min_size, best);
      } else {
        consider_numeric(rows, col, center, total, min_size, best);
      }
    }
    // Useless splits are rejected; the relative slack absorbs rounding.
    if (best.found && !(best.score < node_dev * (1.0 - 1e-12))) {
      best.found = false;
    }
    return best;
  }

  void consider_numeric(const std::vector<std::size_t>& rows, std::size_t col,
                        double center, const Stats& total,
                        std::size_t min_size, Candidate& best) const {
    std::vector<std::size_t> order = rows;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return ds_.value(a, col) < ds_.value(b, col);
    });
    Stats left = empty_stats();
    Stats right = total;
    const std::size_t n = order.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double y = y_[order[i]];
      add(left, y, center);
      remove(right, y, center);
      const double xa = ds_.value(order[i], col);
      const double xb = ds_.value(order[i + 1], col);
      if (!(xa < xb)) continue;
      if (i + 1 < min_size || n - i - 1 < min_size) continue;
      const double score = stats_deviance(left) + stats_deviance(right);
      if (score < best.score) {
        double t = xa + (xb - xa) / 2;
        if (!(xa < t)) t = xb;
        best.score = score;
        best.found = true;
        best.rule = SplitRule{col, SplitRule::Kind::kThreshold, t, {}};
      }
    }
  }

  void consider_categorical(const std::vector<std::size_t>& rows,
                            std::size_t col, double center, const Stats& total,
                            std::size_t min_size, Candidate& best) const {
    const std::size_t L = ds_.schema()[col].levels.size();
    std::vector<Stats> per(L, empty_stats());
    for (std::size_t r : rows) add(per[static_cast<std::size_t>(ds_.code(r, col))], y_[r], center);
    std::vector<int> present;
    std::vector<double> key(L, 0.0);
    for (std::size_t k = 0; k < L; ++k) {
      if (per[k].n <= 0) continue;
      present.push_back(static_cast<int>(k));
      key[k] = kind_ == ResponseKind::kRegression
                   ? per[k].sum / per[k].n
                   : per[k].counts[0] / per[k].n;
    }
    if (present.size() < 2) return;
    std::stable_sort(present.begin(), present.end(),
                     [&](int a, int b) { return key[a] < key[b]; });
    Stats left = empty_stats();
    Stats right = total;
    for (std::size_t k = 0; k + 1 < present.size(); ++k) {
      const Stats& s = per[static_cast<std::size_t>(present[k])];
      left.n += s.n;
      right.n -= s.n;
      left.sum += s.sum;
      right.sum -= s.sum;
      left.sumsq += s.sumsq;
      right.sumsq -= s.sumsq;
      for (std::size_t c = 0; c < left.counts.size(); ++c) {
        left.counts[c] += s.counts[c];
        right.counts[c] -= s.counts[c];
      }
      if (left.n < static_cast<double>(min_size) ||
          right.n < static_cast<double>(min_size)) {
        continue;
      }
      const double score = stats_deviance(left) + stats_deviance(right);
      if (score < best.score) {
        std::vector<int> lv(present.begin(), present.begin() + k + 1);
        std::sort(lv.begin(), lv.end());
        best.score = score;
        best.found = true;
        best.rule = SplitRule{col, SplitRule::Kind::kSubset, 0, std::move(lv)};
      }
    }
  }

  const Dataset& ds_;
  std::span<const double> y_;
  ResponseKind kind_;
  std::size_t n_levels_;
  const std::vector<std::size_t>& predictors_;
  FitParams params_;
  double root_deviance_ = 0;
  std::vector<CartNode> nodes_;
};

}  // namespace

double node_deviance(std::span<const double> values, ResponseKind kind,
                     std::size_t n_levels) {
  return kind == ResponseKind::kRegression
             ? regression_deviance(values)
             : classification_deviance(values, n_levels);
}

bool SplitRule::goes_left(double value) const {
  if (kind == Kind::kThreshold) return value < threshold;
  return std::binary_search(left_levels.begin(), left_levels.end(),
                            static_cast<int>(value));
}

bool PredictorSupport::contains(double value, bool categorical) const {
  if (categorical) {
    return std::binary_search(levels.begin(), levels.end(),
                              static_cast<int>(value));
  }
  return value >= lo && value <= hi;
}

CartTree::CartTree(std::size_t response, std::string response_name,
                   ResponseKind kind, std::size_t n_levels,
                   std::vector<std::size_t> predictors,
                   std::vector<std::string> predictor_names,
                   std::vector<bool> predictor_categorical, FitParams params,
                   std::vector<CartNode> nodes)
    : response_(response),
      response_name_(std::move(response_name)),
      kind_(kind),
      n_levels_(n_levels),
      predictors_(std::move(predictors)),
      predictor_names_(std::move(predictor_names)),
      predictor_categorical_(std::move(predictor_categorical)),
      params_(params),
      nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw Error("tree has no nodes");
}

std::optional<std::size_t> CartTree::predictor_slot(std::size_t column) const {
  for (std::size_t p = 0; p < predictors_.size(); ++p) {
    if (predictors_[p] == column) return p;
  }
  return std::nullopt;
}

std::vector<int> CartTree::leaf_ids() const {
  std::vector<int> out;
  for (const auto& n : nodes_) {
    if (n.is_leaf()) out.push_back(n.id);
  }
  return out;
}

std::vector<int> CartTree::path(std::span<const double> record) const {
  std::vector<int> out;
  int id = 0;
  while (true) {
    out.push_back(id);
    const CartNode& n = node(id);
    if (n.is_leaf()) break;
    id = n.rule->goes_left(record[n.rule->variable]) ? n.left : n.right;
  }
  return out;
}

const CartNode& CartTree::find_leaf(std::span<const double> record) const {
  int id = 0;
  while (!node(id).is_leaf()) {
    const CartNode& n = node(id);
    id = n.rule->goes_left(record[n.rule->variable]) ? n.left : n.right;
  }
  return node(id);
}

const CartNode& CartTree::find_leaf_with_fallback(
    std::span<const double> record, const SupportCheck& check) const {
  const CartNode* n = &find_leaf(record);
  while (n->parent >= 0 && !check(*n, record)) n = &node(n->parent);
  return *n;
}

CartTree fit_tree(const Dataset& ds, std::string_view response,
                  std::span<const std::string> predictors,
                  const FitParams& params) {
  const Schema& schema = ds.schema();
  const std::size_t resp = schema.index_of(response);
  if (ds.n_rows() == 0) throw Error("cannot fit a tree on an empty dataset");
  std::vector<std::size_t> cols;
  std::vector<std::string> names;
  std::vector<bool> categorical;
  for (const auto& p : predictors) {
    const std::size_t j = schema.index_of(p);
    if (j == resp) {
      throw ConfigError("predictor list contains the response '" + p + "'");
    }
    if (std::find(cols.begin(), cols.end(), j) != cols.end()) continue;
    cols.push_back(j);
    names.push_back(p);
    categorical.push_back(schema[j].is_categorical());
  }
  const ResponseKind kind = schema[resp].is_categorical()
                                ? ResponseKind::kClassification
                                : ResponseKind::kRegression;
  const std::size_t n_levels = schema[resp].levels.size();
  Grower grower(ds, resp, kind, n_levels, cols, params);
  std::vector<CartNode> nodes = grower.grow();
  return CartTree(resp, schema[resp].name, kind, n_levels, std::move(cols),
                  std::move(names), std::move(categorical), params,
                  std::move(nodes));
}

CartTree refill_tree(const CartTree& shape, const Dataset& ds) {
  if (ds.n_rows() == 0) throw Error("cannot refill a tree from an empty dataset");
  std::vector<CartNode> nodes = shape.nodes();
  std::vector<std::vector<std::size_t>> members(nodes.size());
  std::vector<double> record(ds.n_cols());
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    for (std::size_t j = 0; j < ds.n_cols(); ++j) record[j] = ds.value(i, j);
    for (int id : shape.path(record)) {
      members[static_cast<std::size_t>(id)].push_back(i);
    }
  }
  const auto y = ds.column(shape.response());
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    fill_node_stats(nodes[k], ds, y, shape.kind(), shape.n_levels(),
                    shape.predictors(), std::move(members[k]));
  }
  std::vector<bool> categorical;
  for (std::size_t p = 0; p < shape.predictors().size(); ++p) {
    categorical.push_back(shape.predictor_is_categorical(p));
  }
  return CartTree(shape.response(), shape.response_name(), shape.kind(),
                  shape.n_levels(), shape.predictors(), shape.predictor_names(),
                  std::move(categorical), shape.params(), std::move(nodes));
}

}  // namespace cart
}  // namespace geosynth

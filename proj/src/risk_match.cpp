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
#include <limits>
#include <map>
#include <utility>

#include "geosynth/errors.hpp"
#include "geosynth/parallel.hpp"
#include "geosynth/risk.hpp"

namespace geosynth {
namespace {

std::vector<std::size_t> planned_columns(const Schema& schema,
                                         const SynthesisPlan& plan) {
  std::vector<std::size_t> cols;
  for (const auto& name : plan.order) cols.push_back(schema.index_of(name));
  return cols;
}

class ReleasedValuesImputer : public Imputer {
 public:
  explicit ReleasedValuesImputer(const SyntheticRelease& release)
      : release_(release) {
    if (release.datasets.empty()) throw ConfigError("release has no datasets");
    cols_ = planned_columns(release.datasets.front().schema(), release.plan);
  }

  std::size_t size() const override { return release_.datasets.size(); }

  std::vector<std::vector<double>> impute(std::size_t index, Rng&) const override {
    const Dataset& d = release_.datasets.at(index);
    std::vector<std::vector<double>> out;
    for (std::size_t col : cols_) {
      const auto v = d.column(col);
      out.emplace_back(v.begin(), v.end());
    }
    return out;
  }

 private:
  const SyntheticRelease& release_;
  std::vector<std::size_t> cols_;
};

class NodePoolImputer : public Imputer {
 public:
  NodePoolImputer(const SyntheticRelease& release, std::size_t mc_draws)
      : release_(release), draws_(mc_draws * release.datasets.size()) {
    if (release.datasets.empty()) throw ConfigError("release has no datasets");
    if (mc_draws == 0) throw ConfigError("mc_draws must be at least 1");
    if (release.trees.size() != release.plan.order.size()) {
      throw ConfigError("node-pool imputation needs the tree rules");
    }
    const Dataset& first = release.datasets.front();
    cols_ = planned_columns(first.schema(), release.plan);
    pools_.resize(cols_.size());
    std::vector<double> record(first.n_cols());
    for (std::size_t k = 0; k < cols_.size(); ++k) {
      const cart::CartTree& tree = *release.trees[k];
      pools_[k].resize(tree.nodes().size());
      for (const Dataset& d : release.datasets) {
        for (std::size_t j = 0; j < d.n_rows(); ++j) {
          for (std::size_t c = 0; c < d.n_cols(); ++c) record[c] = d.value(j, c);
          for (int id : tree.path(record)) {
            pools_[k][static_cast<std::size_t>(id)].push_back(d.value(j, cols_[k]));
          }
        }
      }
    }
  }

  std::size_t size() const override { return draws_; }

  std::vector<std::vector<double>> impute(std::size_t, Rng& rng) const override {
    const Dataset& base = release_.datasets.front();
    const std::size_t n = base.n_rows();
    std::vector<std::vector<double>> out(cols_.size(), std::vector<double>(n));
    std::vector<double> record(base.n_cols());
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t c = 0; c < base.n_cols(); ++c) record[c] = base.value(j, c);
      for (std::size_t k = 0; k < cols_.size(); ++k) {
        const cart::CartTree& tree = *release_.trees[k];
        const cart::CartNode* node = &tree.find_leaf(record);
        while (pools_[k][static_cast<std::size_t>(node->id)].empty() && node->parent >= 0) {
          node = &tree.node(node->parent);
        }
        const auto& pool = pools_[k][static_cast<std::size_t>(node->id)];
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        out[k][j] = pool[pick(rng)];
        record[cols_[k]] = out[k][j];
      }
    }
    return out;
  }

 private:
  const SyntheticRelease& release_;
  std::size_t draws_;
  std::vector<std::size_t> cols_;
  // pools_[k][node]: synthetic values routed through the node.
  std::vector<std::vector<std::vector<double>>> pools_;
};

class TreeAtomImputer : public Imputer {
 public:
  TreeAtomImputer(const SyntheticRelease& release, std::size_t mc_draws)
      : release_(release), draws_(mc_draws * release.datasets.size()) {
    if (release.datasets.empty()) throw ConfigError("release has no datasets");
    if (mc_draws == 0) throw ConfigError("mc_draws must be at least 1");
    if (release.trees.size() != release.plan.order.size()) {
      throw ConfigError("tree-atom imputation needs the fitted trees");
    }
    for (const auto& t : release.trees) {
      if (!t || t->root().values.empty()) {
        throw ConfigError("tree-atom imputation needs node values");
      }
    }
    cols_ = planned_columns(release.datasets.front().schema(), release.plan);
  }

  std::size_t size() const override { return draws_; }

  std::vector<std::vector<double>> impute(std::size_t, Rng& rng) const override {
    const Dataset& base = release_.datasets.front();
    std::map<std::size_t, std::vector<double>> drawn;
    std::vector<std::vector<double>> out;
    for (std::size_t k = 0; k < cols_.size(); ++k) {
      ColumnDraw d = sample_column(base, *release_.trees[k], drawn, 0.0,
                                   release_.plan.per_record_bootstrap, rng);
      drawn[cols_[k]] = d.values;
      out.push_back(std::move(d.values));
    }
    return out;
  }

 private:
  const SyntheticRelease& release_;
  std::size_t draws_;
  std::vector<std::size_t> cols_;
};

struct Key {
  // Column in the released data and in the targets.
  std::size_t released_col;
  std::size_t target_col;
  // Position in the plan, for synthesized keys.
  std::optional<std::size_t> plan_pos;
  bool categorical;
};

}  // namespace

std::unique_ptr<Imputer> make_released_values_imputer(
    const SyntheticRelease& release) {
  return std::make_unique<ReleasedValuesImputer>(release);
}

std::unique_ptr<Imputer> make_node_pool_imputer(const SyntheticRelease& release,
                                                std::size_t mc_draws) {
  return std::make_unique<NodePoolImputer>(release, mc_draws);
}

std::unique_ptr<Imputer> make_tree_atom_imputer(const SyntheticRelease& release,
                                                std::size_t mc_draws) {
  return std::make_unique<TreeAtomImputer>(release, mc_draws);
}

std::unique_ptr<Imputer> make_imputer(const SyntheticRelease& release,
                                      MetadataLevel level,
                                      std::size_t mc_draws) {
  switch (level) {
    case MetadataLevel::kEmpty:
      return make_released_values_imputer(release);
    case MetadataLevel::kRulesOnly:
      return make_node_pool_imputer(release, mc_draws);
    case MetadataLevel::kFull:
      return make_tree_atom_imputer(release, mc_draws);
  }
  throw ConfigError("unknown metadata level");
}

std::vector<std::vector<double>> match_probabilities(
    const Dataset& released, const SynthesisPlan& plan, const Dataset& targets,
    const IntruderScenario& scenario, const Imputer& imputer, Rng& rng,
    std::size_t threads) {
  if (scenario.known_quasi_identifiers.empty()) {
    throw ConfigError("no known quasi-identifiers");
  }
  const Schema& rs = released.schema();
  const Schema& ts = targets.schema();
  std::vector<Key> exact;
  std::vector<Key> imputed;
  for (const auto& name : scenario.known_quasi_identifiers) {
    Key key{rs.index_of(name), ts.find(name).value_or(ts.size()), std::nullopt,
            rs[rs.index_of(name)].is_categorical()};
    if (key.target_col == ts.size()) {
      throw SchemaError("targets lack quasi-identifier '" + name + "'");
    }
    if (key.categorical && rs[key.released_col].levels != ts[key.target_col].levels) {
      throw SchemaError("levels of '" + name + "' differ between release and targets");
    }
    const auto it = std::find(plan.order.begin(), plan.order.end(), name);
    if (it != plan.order.end()) {
      key.plan_pos = static_cast<std::size_t>(it - plan.order.begin());
      imputed.push_back(key);
    } else {
      exact.push_back(key);
    }
  }

  const std::size_t n = released.n_rows();
  const std::size_t nt = targets.n_rows();
  std::map<std::vector<double>, std::vector<std::size_t>> groups;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> k;
    for (const Key& e : exact) k.push_back(released.value(j, e.released_col));
    groups[std::move(k)].push_back(j);
  }
  std::vector<const std::vector<std::size_t>*> group_of(nt, nullptr);
  for (std::size_t t = 0; t < nt; ++t) {
    std::vector<double> k;
    for (const Key& e : exact) k.push_back(targets.value(t, e.target_col));
    const auto it = groups.find(k);
    if (it != groups.end()) group_of[t] = &it->second;
  }

  std::vector<std::vector<double>> probs(nt, std::vector<double>(n + 1, 0.0));
  for (std::size_t d = 0; d < imputer.size(); ++d) {
    const std::vector<std::vector<double>> imp = imputer.impute(d, rng);
    const double w = imputer.weight(d);
    parallel_for(nt, threads, [&](std::size_t t) {
      const auto* group = group_of[t];
      if (!group) return;
      int best_mis = std::numeric_limits<int>::max();
      double best_dist = std::numeric_limits<double>::infinity();
      std::vector<std::size_t> best;
      for (std::size_t j : *group) {
        int mis = 0;
        double dist = 0;
        for (const Key& key : imputed) {
          const double a = imp[*key.plan_pos][j];
          const double b = targets.value(t, key.target_col);
          if (key.categorical) {
            mis += a != b;
          } else {
            dist += (a - b) * (a - b);
          }
        }
        if (mis < best_mis || (mis == best_mis && dist < best_dist)) {
          best_mis = mis;
          best_dist = dist;
          best.clear();
        }
        if (mis == best_mis && dist == best_dist) best.push_back(j);
      }
      const double share = w / static_cast<double>(best.size());
      for (std::size_t j : best) probs[t][j] += share;
    });
  }
  for (std::size_t t = 0; t < nt; ++t) {
    if (group_of[t]) continue;
    if (scenario.sample_membership_known) {
      std::fill(probs[t].begin(), probs[t].end() - 1, 1.0 / static_cast<double>(n));
    } else {
      probs[t][n] = 1.0;
    }
  }
  return probs;
}

MatchRiskSummary match_risk_from_counts(std::span<const std::size_t> c,
                                        std::span<const int> g) {
  if (c.size() != g.size() || c.empty()) {
    throw ConfigError("match summary needs equal, nonempty c and g");
  }
  double expected = 0;
  double true_hits = 0;
  double f_total = 0;
  double f_false = 0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (c[j] == 0) throw ConfigError("tie count must be positive");
    expected += g[j] ? 1.0 / static_cast<double>(c[j]) : 0.0;
    true_hits += (c[j] == 1 && g[j]) ? 1.0 : 0.0;
    if (c[j] == 1) {
      f_total += 1;
      f_false += g[j] ? 0.0 : 1.0;
    }
  }
  const double n = static_cast<double>(c.size());
  MatchRiskSummary out;
  out.expected = expected / n;
  out.true_rate = true_hits / n;
  if (f_total > 0) out.false_rate = f_false / f_total;
  return out;
}

MatchRiskSummary match_risk_summary(
    const std::vector<std::vector<double>>& probabilities,
    std::span<const std::optional<std::size_t>> truth) {
  if (probabilities.size() != truth.size()) {
    throw ConfigError("one truth link per target is required");
  }
  std::vector<std::size_t> c(probabilities.size());
  std::vector<int> g(probabilities.size());
  for (std::size_t t = 0; t < probabilities.size(); ++t) {
    const auto& p = probabilities[t];
    if (p.size() < 2) throw ConfigError("match probabilities need n + 1 entries");
    const std::size_t n = p.size() - 1;
    const double top = *std::max_element(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(n));
    const double cut = top * (1.0 - 1e-12);
    std::size_t count = 0;
    bool hit = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (p[j] >= cut) {
        ++count;
        hit = hit || (truth[t] && *truth[t] == j);
      }
    }
    c[t] = count;
    g[t] = hit ? 1 : 0;
  }
  return match_risk_from_counts(c, g);
}

}  // namespace geosynth

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

#include "geosynth/synthesizer.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "geosynth/errors.hpp"
#include "geosynth/parallel.hpp"

namespace geosynth {

void SynthesisPlan::validate(const Schema& schema) const {
  if (order.empty()) throw ConfigError("synthesis plan names no variables");
  if (m < 2) throw ConfigError("synthesis plan needs m >= 2");
  std::set<std::string> seen;
  bool attribute_seen = false;
  for (const auto& name : order) {
    const auto j = schema.find(name);
    if (!j) throw ConfigError("plan references unknown variable '" + name + "'");
    if (!seen.insert(name).second) {
      throw ConfigError("plan lists '" + name + "' twice");
    }
    const VariableSpec& v = schema[*j];
    const bool geo = v.role == VariableRole::kLongitude ||
                     v.role == VariableRole::kLatitude;
    if (geo && attribute_seen) {
      throw ConfigError("geography variable '" + name +
                        "' must precede attribute variables in the plan");
    }
    if (!geo) attribute_seen = true;
    if (!v.is_categorical()) {
      auto it = bandwidths.find(name);
      if (it == bandwidths.end()) {
        throw ConfigError("plan gives no bandwidth for '" + name + "'");
      }
      if (!(it->second >= 0) || !std::isfinite(it->second)) {
        throw ConfigError("bandwidth for '" + name + "' must be >= 0");
      }
    }
  }
  for (const auto& [name, h] : bandwidths) {
    if (!schema.find(name)) {
      throw ConfigError("bandwidth given for unknown variable '" + name + "'");
    }
  }
}

double SynthesisPlan::bandwidth(const std::string& name) const {
  auto it = bandwidths.find(name);
  return it == bandwidths.end() ? 0.0 : it->second;
}

SynthesisPlan SynthesisPlan::geography(const Schema& schema, double h,
                                       bool latitude_first) {
  SynthesisPlan plan;
  const std::string lon = schema[schema.longitude()].name;
  const std::string lat = schema[schema.latitude()].name;
  plan.order = latitude_first ? std::vector<std::string>{lat, lon}
                              : std::vector<std::string>{lon, lat};
  plan.bandwidths = {{lon, h}, {lat, h}};
  return plan;
}

SynthesisPlan SynthesisPlan::geography_age_race(const Schema& schema, double h,
                                                const std::string& age,
                                                const std::string& race,
                                                double h_age) {
  SynthesisPlan plan = geography(schema, h);
  plan.order.push_back(age);
  plan.order.push_back(race);
  plan.bandwidths[age] = h_age;
  return plan;
}

std::vector<std::string> conditioning_set(const Schema& schema,
                                          const SynthesisPlan& plan,
                                          std::size_t k) {
  std::set<std::string> planned(plan.order.begin(), plan.order.end());
  std::vector<std::string> out;
  for (const auto& v : schema.variables()) {
    if (!planned.count(v.name)) out.push_back(v.name);
  }
  for (std::size_t i = 0; i < k && i < plan.order.size(); ++i) {
    out.push_back(plan.order[i]);
  }
  return out;
}

BootstrapWeights BootstrapWeights::draw(std::size_t k, Rng& rng) {
  if (k == 0) throw Error("Bayesian bootstrap over an empty multiset");
  BootstrapWeights w;
  w.cumulative_.resize(k);
  for (std::size_t i = 0; i + 1 < k; ++i) w.cumulative_[i] = uniform_open(rng);
  std::sort(w.cumulative_.begin(), w.cumulative_.end() - 1);
  w.cumulative_.back() = 1.0;
  return w;
}

std::vector<double> BootstrapWeights::probabilities() const {
  std::vector<double> p(cumulative_.size());
  double prev = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = cumulative_[i] - prev;
    prev = cumulative_[i];
  }
  return p;
}

std::size_t BootstrapWeights::sample(Rng& rng) const {
  if (cumulative_.size() == 1) return 0;
  const double u = uniform_open(rng);
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                               cumulative_.size() - 1);
}

std::vector<double> bayesian_bootstrap(std::span<const double> values,
                                       std::size_t count, Rng& rng) {
  const BootstrapWeights w = BootstrapWeights::draw(values.size(), rng);
  std::vector<double> out(count);
  for (auto& v : out) v = values[w.sample(rng)];
  return out;
}

double kernel_sample(double center, double h, Interval support, Rng& rng) {
  if (!(h > 0) || !(support.hi > support.lo)) {
    return std::clamp(center, support.lo, support.hi);
  }
  const double pa = normal_cdf((support.lo - center) / h);
  const double pb = normal_cdf((support.hi - center) / h);
  const double u = pa + uniform_open(rng) * (pb - pa);
  const double x = center + h * normal_quantile(u);
  return std::clamp(x, support.lo, support.hi);
}

ColumnDraw sample_column(
    const Dataset& base, const cart::CartTree& tree,
    const std::map<std::size_t, std::vector<double>>& already_synthesized,
    double h, bool per_record_bootstrap, Rng& rng) {
  const std::size_t n = base.n_rows();
  const bool continuous = tree.kind() == cart::ResponseKind::kRegression;

  // Predictor slots that carry synthetic values during routing.
  std::vector<std::size_t> synth_slots;
  for (const auto& [col, values] : already_synthesized) {
    if (values.size() != n) throw Error("synthetic column length mismatch");
    if (auto slot = tree.predictor_slot(col)) synth_slots.push_back(*slot);
  }
  const cart::SupportCheck check = [&](const cart::CartNode& node,
                                       std::span<const double> record) {
    for (const std::size_t slot : synth_slots) {
      const std::size_t col = tree.predictors()[slot];
      if (!node.support[slot].contains(record[col],
                                       tree.predictor_is_categorical(slot))) {
        return false;
      }
    }
    return true;
  };

  ColumnDraw out;
  out.values.resize(n);
  out.nodes.resize(n);
  std::unordered_map<int, BootstrapWeights> weights;
  std::vector<double> record(base.n_cols());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < base.n_cols(); ++j) record[j] = base.value(i, j);
    for (const auto& [col, values] : already_synthesized) record[col] = values[i];
    const cart::CartNode& node = tree.find_leaf_with_fallback(record, check);
    const BootstrapWeights* w = nullptr;
    BootstrapWeights local;
    if (per_record_bootstrap) {
      local = BootstrapWeights::draw(node.values.size(), rng);
      w = &local;
    } else {
      auto it = weights.find(node.id);
      if (it == weights.end()) {
        it = weights.emplace(node.id, BootstrapWeights::draw(node.values.size(), rng)).first;
      }
      w = &it->second;
    }
    const double atom = node.values[w->sample(rng)];
    out.values[i] = continuous
                        ? kernel_sample(atom, h, {node.value_min, node.value_max}, rng)
                        : atom;
    out.nodes[i] = node.id;
  }
  return out;
}

std::vector<double> synthesize_column(
    const Dataset& ds, const std::string& target,
    const std::vector<std::string>& predictors,
    const std::map<std::size_t, std::vector<double>>& already_synthesized,
    double h, const cart::FitParams& tree_params, Rng& rng) {
  if (std::find(predictors.begin(), predictors.end(), target) != predictors.end()) {
    throw ConfigError("predictors must not include the target '" + target + "'");
  }
  const cart::CartTree tree = cart::fit_tree(ds, target, predictors, tree_params);
  return sample_column(ds, tree, already_synthesized, h, false, rng).values;
}

std::vector<std::shared_ptr<const cart::CartTree>> fit_plan_trees(
    const Dataset& original, const SynthesisPlan& plan) {
  plan.validate(original.schema());
  std::vector<std::shared_ptr<const cart::CartTree>> trees;
  for (std::size_t k = 0; k < plan.order.size(); ++k) {
    const auto preds = conditioning_set(original.schema(), plan, k);
    trees.push_back(std::make_shared<const cart::CartTree>(
        cart::fit_tree(original, plan.order[k], preds, plan.tree_params)));
  }
  return trees;
}

Replicate draw_replicate(
    const Dataset& base, const SynthesisPlan& plan,
    const std::vector<std::shared_ptr<const cart::CartTree>>& trees, Rng& rng) {
  std::map<std::size_t, std::vector<double>> synthetic;
  std::vector<std::vector<int>> nodes;
  for (std::size_t k = 0; k < plan.order.size(); ++k) {
    const std::size_t col = base.schema().index_of(plan.order[k]);
    ColumnDraw draw = sample_column(base, *trees[k], synthetic,
                                    plan.bandwidth(plan.order[k]),
                                    plan.per_record_bootstrap, rng);
    synthetic[col] = std::move(draw.values);
    nodes.push_back(std::move(draw.nodes));
  }
  return {base.with_columns(synthetic), std::move(nodes)};
}

SyntheticRelease generate_release(const Dataset& original,
                                  const SynthesisPlan& plan,
                                  MetadataLevel level) {
  SyntheticRelease rel;
  rel.plan = plan;
  rel.metadata_level = level;
  rel.trees = fit_plan_trees(original, plan);
  std::vector<std::optional<Replicate>> reps(plan.m);
  parallel_for(plan.m, plan.threads, [&](std::size_t l) {
    Rng rng = make_stream(plan.seed, {static_cast<std::uint64_t>(l)});
    reps[l] = draw_replicate(original, plan, rel.trees, rng);
  });
  for (auto& r : reps) {
    rel.datasets.push_back(std::move(r->data));
    rel.generating_nodes.push_back(std::move(r->nodes));
  }
  return rel;
}

}  // namespace geosynth

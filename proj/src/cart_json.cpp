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

#include <json.hpp>

#include "geosynth/cart.hpp"
#include "geosynth/errors.hpp"

namespace geosynth::cart {

using nlohmann::ordered_json;

std::string tree_to_json(const CartTree& tree, const Schema& schema,
                         MetadataLevel level, double bandwidth) {
  if (level == MetadataLevel::kEmpty) {
    throw ConfigError("trees are not exported at metadata level EMPTY");
  }
  const bool full = level == MetadataLevel::kFull;
  ordered_json doc;
  doc["response"] = tree.response_name();
  doc["kind"] = tree.kind() == ResponseKind::kRegression ? "regression"
                                                         : "classification";
  doc["predictors"] = tree.predictor_names();
  doc["bandwidth"] = bandwidth;
  doc["redaction"] = std::string(to_string(level));
  doc["fit_params"] = {{"min_node_size", tree.params().min_node_size},
                       {"min_dev_fraction", tree.params().min_dev_fraction},
                       {"absolute_min_dev", tree.params().absolute_min_dev}};
  ordered_json nodes = ordered_json::array();
  for (const CartNode& n : tree.nodes()) {
    ordered_json e;
    e["id"] = n.id;
    e["parent"] = n.parent;
    if (n.rule) {
      const VariableSpec& v = schema[n.rule->variable];
      ordered_json r;
      r["variable"] = v.name;
      if (n.rule->kind == SplitRule::Kind::kThreshold) {
        r["type"] = "threshold";
        r["threshold"] = n.rule->threshold;
      } else {
        r["type"] = "subset";
        std::vector<std::string> labels;
        for (int k : n.rule->left_levels) {
          labels.push_back(v.levels.at(static_cast<std::size_t>(k)));
        }
        r["left_levels"] = labels;
      }
      e["rule"] = std::move(r);
      e["left"] = n.left;
      e["right"] = n.right;
    }
    if (full) {
      std::vector<double> values = n.values;
      std::sort(values.begin(), values.end());
      e["deviance"] = n.deviance;
      if (tree.kind() == ResponseKind::kClassification) {
        const VariableSpec& resp = schema[tree.response()];
        std::vector<std::string> labels;
        for (double v : values) {
          labels.push_back(resp.levels.at(static_cast<std::size_t>(v)));
        }
        e["values"] = labels;
      } else {
        e["values"] = values;
      }
      ordered_json sup = ordered_json::array();
      for (std::size_t p = 0; p < n.support.size(); ++p) {
        ordered_json s;
        s["variable"] = tree.predictor_names()[p];
        if (tree.predictor_is_categorical(p)) {
          const VariableSpec& v = schema[tree.predictors()[p]];
          std::vector<std::string> labels;
          for (int k : n.support[p].levels) {
            labels.push_back(v.levels.at(static_cast<std::size_t>(k)));
          }
          s["levels"] = labels;
        } else {
          s["min"] = n.support[p].lo;
          s["max"] = n.support[p].hi;
        }
        sup.push_back(std::move(s));
      }
      e["support"] = std::move(sup);
    }
    nodes.push_back(std::move(e));
  }
  doc["nodes"] = std::move(nodes);
  return doc.dump(2);
}

CartTree tree_from_json(std::string_view text, const Schema& schema) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed tree JSON: ") + e.what());
  }
  const std::string response = doc.at("response").get<std::string>();
  const std::size_t resp = schema.index_of(response);
  const ResponseKind kind = doc.at("kind").get<std::string>() == "regression"
                                ? ResponseKind::kRegression
                                : ResponseKind::kClassification;
  std::vector<std::size_t> cols;
  std::vector<std::string> names;
  std::vector<bool> categorical;
  for (const auto& p : doc.at("predictors")) {
    const std::string name = p.get<std::string>();
    const std::size_t j = schema.index_of(name);
    cols.push_back(j);
    names.push_back(name);
    categorical.push_back(schema[j].is_categorical());
  }
  FitParams params;
  if (doc.contains("fit_params")) {
    const auto& fp = doc["fit_params"];
    params.min_node_size = fp.value("min_node_size", params.min_node_size);
    params.min_dev_fraction = fp.value("min_dev_fraction", params.min_dev_fraction);
    params.absolute_min_dev = fp.value("absolute_min_dev", false);
  }
  std::vector<CartNode> nodes;
  for (const auto& e : doc.at("nodes")) {
    CartNode n;
    n.id = e.at("id").get<int>();
    n.parent = e.at("parent").get<int>();
    if (e.contains("rule")) {
      const auto& r = e["rule"];
      SplitRule rule;
      rule.variable = schema.index_of(r.at("variable").get<std::string>());
      const VariableSpec& v = schema[rule.variable];
      if (r.at("type").get<std::string>() == "threshold") {
        rule.kind = SplitRule::Kind::kThreshold;
        rule.threshold = r.at("threshold").get<double>();
      } else {
        rule.kind = SplitRule::Kind::kSubset;
        for (const auto& l : r.at("left_levels")) {
          auto k = v.level_index(l.get<std::string>());
          if (!k) throw SchemaError("tree references unknown level of '" + v.name + "'");
          rule.left_levels.push_back(*k);
        }
        std::sort(rule.left_levels.begin(), rule.left_levels.end());
      }
      n.rule = std::move(rule);
      n.left = e.at("left").get<int>();
      n.right = e.at("right").get<int>();
    }
    if (e.contains("values")) {
      n.deviance = e.value("deviance", 0.0);
      for (const auto& v : e["values"]) {
        if (kind == ResponseKind::kClassification) {
          auto k = schema[resp].level_index(v.get<std::string>());
          if (!k) throw SchemaError("tree value is not a level of '" + response + "'");
          n.values.push_back(*k);
        } else {
          n.values.push_back(v.get<double>());
        }
      }
      if (!n.values.empty()) {
        auto [lo, hi] = std::minmax_element(n.values.begin(), n.values.end());
        n.value_min = *lo;
        n.value_max = *hi;
      }
    }
    if (e.contains("support")) {
      std::size_t p = 0;
      for (const auto& s : e["support"]) {
        PredictorSupport ps;
        if (p < categorical.size() && categorical[p]) {
          const VariableSpec& v = schema[cols[p]];
          for (const auto& l : s.at("levels")) {
            auto k = v.level_index(l.get<std::string>());
            if (k) ps.levels.push_back(*k);
          }
        } else {
          ps.lo = s.at("min").get<double>();
          ps.hi = s.at("max").get<double>();
        }
        n.support.push_back(std::move(ps));
        ++p;
      }
    }
    nodes.push_back(std::move(n));
  }
  for (const auto& n : nodes) {
    if (n.left >= 0) nodes[static_cast<std::size_t>(n.left)].depth = n.depth + 1;
    if (n.right >= 0) nodes[static_cast<std::size_t>(n.right)].depth = n.depth + 1;
  }
  return CartTree(resp, response, kind, schema[resp].levels.size(),
                  std::move(cols), std::move(names), std::move(categorical),
                  params, std::move(nodes));
}

}  // namespace geosynth::cart

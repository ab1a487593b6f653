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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "geosynth/errors.hpp"
#include "geosynth/synthesizer.hpp"

namespace geosynth {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::string metadata_json(const SyntheticRelease& rel, const Schema& schema) {
  ordered_json doc;
  doc["m"] = rel.m();
  doc["metadata_level"] = std::string(to_string(rel.metadata_level));
  doc["order"] = rel.plan.order;
  ordered_json bw = ordered_json::object();
  for (const auto& name : rel.plan.order) {
    if (!schema[schema.index_of(name)].is_categorical()) {
      bw[name] = rel.plan.bandwidth(name);
    }
  }
  doc["bandwidths"] = std::move(bw);
  doc["bootstrap"] = rel.plan.per_record_bootstrap ? "per_record" : "per_node";
  if (rel.metadata_level == MetadataLevel::kFull) doc["seed"] = rel.plan.seed;
  ordered_json trees = ordered_json::array();
  if (rel.metadata_level != MetadataLevel::kEmpty) {
    for (std::size_t k = 0; k < rel.trees.size(); ++k) {
      trees.push_back(ordered_json::parse(cart::tree_to_json(
          *rel.trees[k], schema, rel.metadata_level,
          rel.plan.bandwidth(rel.plan.order[k]))));
    }
  }
  doc["trees"] = std::move(trees);
  return doc.dump(2);
}

}  // namespace

std::vector<std::string> write_release(const std::string& dir,
                                       const SyntheticRelease& release) {
  if (release.datasets.empty()) throw Error("release holds no replicates");
  const Schema& schema = release.datasets.front().schema();
  fs::create_directories(dir);
  std::vector<std::string> paths;
  for (std::size_t l = 0; l < release.m(); ++l) {
    const fs::path p = fs::path(dir) / ("synth_" + std::to_string(l + 1) + ".csv");
    write_csv(p.string(), release.datasets[l]);
    paths.push_back(p.string());
  }
  const fs::path sp = fs::path(dir) / "schema.json";
  save_schema(sp.string(), schema);
  paths.push_back(sp.string());
  const fs::path mp = fs::path(dir) / "metadata.json";
  write_text(mp, metadata_json(release, schema));
  paths.push_back(mp.string());
  return paths;
}

LoadedRelease read_release(const std::string& dir) {
  const fs::path sp = fs::path(dir) / "schema.json";
  if (!fs::exists(sp)) throw Error("no schema.json in " + dir);
  LoadedRelease out{load_schema(sp.string()), {}, {}};
  for (std::size_t l = 1;; ++l) {
    const fs::path p = fs::path(dir) / ("synth_" + std::to_string(l) + ".csv");
    if (!fs::exists(p)) break;
    out.datasets.push_back(load_csv(p.string(), out.schema));
  }
  if (out.datasets.empty()) throw Error("no synth_*.csv files in " + dir);
  const fs::path mp = fs::path(dir) / "metadata.json";
  if (fs::exists(mp)) {
    std::ifstream in(mp, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    out.metadata_json = ss.str();
  }
  return out;
}

SyntheticRelease load_release(const std::string& dir) {
  LoadedRelease loaded = read_release(dir);
  if (loaded.metadata_json.empty()) throw Error("no metadata.json in " + dir);
  SyntheticRelease rel;
  const Schema& schema = loaded.schema;
  try {
    const ordered_json doc = ordered_json::parse(loaded.metadata_json);
    rel.metadata_level =
        parse_metadata_level(doc.at("metadata_level").get<std::string>());
    rel.plan.order = doc.at("order").get<std::vector<std::string>>();
    for (const auto& [name, h] : doc.at("bandwidths").items()) {
      rel.plan.bandwidths[name] = h.get<double>();
    }
    rel.plan.per_record_bootstrap = doc.value("bootstrap", "per_node") == "per_record";
    if (doc.contains("seed")) rel.plan.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& t : doc.at("trees")) {
      rel.trees.push_back(std::make_shared<const cart::CartTree>(
          cart::tree_from_json(t.dump(), schema)));
    }
    const auto m = doc.at("m").get<std::size_t>();
    if (m != loaded.datasets.size()) {
      throw Error("metadata.json lists m = " + std::to_string(m) + " but " +
                  dir + " holds " + std::to_string(loaded.datasets.size()) +
                  " replicates");
    }
  } catch (const ordered_json::exception& e) {
    throw ParseError(dir + "/metadata.json: " + e.what());
  }
  if (!rel.trees.empty() && rel.trees.size() != rel.plan.order.size()) {
    throw ParseError(dir + "/metadata.json: tree count does not match the plan");
  }
  rel.plan.m = loaded.datasets.size();
  rel.plan.validate(schema);
  rel.datasets = std::move(loaded.datasets);
  return rel;
}

}  // namespace geosynth

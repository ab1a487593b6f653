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

#include "geosynth/errors.hpp"
#include "geosynth/utility.hpp"

namespace geosynth {
namespace {

std::size_t pick(std::span<const double> weights, Rng& rng) {
  double total = 0;
  for (double w : weights) total += w;
  const double u = uniform_open(rng) * total;
  double acc = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    acc += weights[k];
    if (u < acc) return k;
  }
  return weights.size() - 1;
}

Point draw_location(const Cluster& c, Rng& rng) {
  Point p;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double z1 = standard_normal(rng);
    const double z2 = standard_normal(rng);
    p.x = c.centre.x + c.sd_x * z1;
    p.y = c.centre.y + c.sd_y * (c.rho * z1 + std::sqrt(1 - c.rho * c.rho) * z2);
    if (kRecodedRange.contains(p.x) && kRecodedRange.contains(p.y)) return p;
  }
  return {std::clamp(p.x, kRecodedRange.lo, kRecodedRange.hi),
          std::clamp(p.y, kRecodedRange.lo, kRecodedRange.hi)};
}

}  // namespace

PopulationSpec PopulationSpec::standard() {
  PopulationSpec s;
  //            w     centre      sdx  sdy  rho  black male  age  age_sd educ
  s.clusters = {
      {0.16, {20, 75}, 9, 7, 0.2, 0.65, 0.47, 66, 14, 11.0},
      {0.14, {50, 80}, 12, 8, 0.0, 0.35, 0.50, 70, 14, 12.5},
      {0.14, {82, 72}, 8, 10, 0.0, 0.15, 0.52, 73, 13, 14.0},
      {0.14, {15, 25}, 8, 10, 0.0, 0.50, 0.48, 68, 15, 11.5},
      {0.14, {40, 30}, 10, 8, -0.3, 0.20, 0.50, 72, 14, 13.5},
      {0.14, {65, 20}, 9, 9, 0.0, 0.45, 0.49, 69, 14, 12.0},
      {0.14, {88, 35}, 7, 12, 0.0, 0.10, 0.53, 74, 13, 14.5},
  };
  return s;
}

Dataset simulate_population(std::size_t n, const PopulationSpec& spec, Rng& rng) {
  if (n == 0) throw ConfigError("population size must be at least 1");
  if (spec.clusters.empty()) throw ConfigError("population needs at least one cluster");
  std::vector<double> weights;
  for (const auto& c : spec.clusters) weights.push_back(c.weight);
  std::vector<double> lon(n), lat(n), sex(n), race(n), age(n), educ(n), marital(n),
      autopsy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Cluster& c = spec.clusters[pick(weights, rng)];
    const Point p = draw_location(c, rng);
    lon[i] = p.x;
    lat[i] = p.y;
    sex[i] = uniform_open(rng) < c.p_male ? 1 : 0;
    race[i] = uniform_open(rng) < c.p_black ? 1 : 0;
    const double a = c.age_mean - 3.0 * race[i] + c.age_sd * standard_normal(rng);
    age[i] = std::clamp(std::round(a), 16.0, 99.0);
    const double e = c.educ_mean - 0.7 * race[i] + 2.6 * standard_normal(rng);
    educ[i] = std::clamp(std::round(e), 0.0, 20.0);
    const double w[5] = {0.45, std::max(0.02, 0.007 * (age[i] - 40)), 0.12,
                         std::max(0.03, 0.25 - 0.003 * (age[i] - 16)), 0.05};
    marital[i] = static_cast<double>(pick(w, rng));
    const double u = uniform_open(rng);
    autopsy[i] = u < 0.05 ? 2 : (u < 0.15 ? 1 : 0);
  }
  std::vector<VariableSpec> vars{
      {"lon", VariableKind::kContinuous, {}, VariableRole::kLongitude},
      {"lat", VariableKind::kContinuous, {}, VariableRole::kLatitude},
      {"sex", VariableKind::kCategorical, {"female", "male"}, VariableRole::kAttribute},
      {"race", VariableKind::kCategorical, {"white", "black"}, VariableRole::kAttribute},
      {"age", VariableKind::kContinuous, {}, VariableRole::kAttribute},
      {"educ", VariableKind::kContinuous, {}, VariableRole::kAttribute},
      {"marital",
       VariableKind::kCategorical,
       {"married", "widowed", "divorced", "never_married", "separated"},
       VariableRole::kAttribute},
  };
  std::vector<std::vector<double>> cols{lon, lat, sex, race, age, educ, marital};
  if (spec.include_autopsy) {
    vars.push_back({"autopsy", VariableKind::kCategorical, {"no", "yes", "missing"},
                    VariableRole::kAttribute});
    cols.push_back(autopsy);
  }
  return Dataset(Schema(std::move(vars)), std::move(cols));
}

RegionMap standard_regions() {
  auto rect = [](double x0, double y0, double x1, double y1) {
    return Polygon{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
  };
  const double t = 100.0 / 3;
  return RegionMap::polygons({
      {"Z1", rect(0, 50, t, 100)},
      {"Z2", rect(t, 50, 2 * t, 100)},
      {"Z3", rect(2 * t, 50, 100, 100)},
      {"Z4", rect(0, 0, 25, 50)},
      {"Z5", rect(25, 0, 50, 50)},
      {"Z6", rect(50, 0, 75, 50)},
      {"Z7", rect(75, 0, 100, 50)},
  });
}

}  // namespace geosynth

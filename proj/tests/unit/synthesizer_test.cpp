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
#include <filesystem>
#include <numeric>

#include <gtest/gtest.h>
#include <json.hpp>

#include "geosynth/errors.hpp"
#include "test_util.hpp"

namespace geosynth {
namespace {

using testing::categorical;
using testing::continuous;

TEST(BootstrapTest, SingleAtom) {
  Rng rng = make_stream(1, {});
  const std::vector<double> v{7.7};
  EXPECT_EQ(bayesian_bootstrap(v, 3, rng), (std::vector<double>{7.7, 7.7, 7.7}));
}

TEST(BootstrapTest, ProbabilitiesSumToOne) {
  Rng rng = make_stream(2, {});
  for (std::size_t k : {1, 2, 3, 10, 1000}) {
    const BootstrapWeights w = BootstrapWeights::draw(k, rng);
    EXPECT_EQ(w.cumulative().back(), 1.0);
    const auto p = w.probabilities();
    for (double x : p) EXPECT_GE(x, 0);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-15);
  }
}

TEST(BootstrapTest, TwoAtomFrequency) {
  Rng rng = make_stream(3, {});
  const std::vector<double> v{0, 1};
  double ones = 0;
  const int reps = 100000;
  for (int r = 0; r < reps; ++r) ones += bayesian_bootstrap(v, 1, rng)[0];
  EXPECT_NEAR(ones / reps, 0.5, 0.01);
}

TEST(KernelSampleTest, DegenerateAndTruncated) {
  Rng rng = make_stream(4, {});
  EXPECT_EQ(kernel_sample(42, 0, {0, 100}, rng), 42);
  for (int i = 0; i < 10000; ++i) {
    const double x = kernel_sample(0.5, 5, {0, 1}, rng);
    ASSERT_GE(x, 0);
    ASSERT_LE(x, 1);
  }
  // Far-tail truncation window stays inside support.
  for (int i = 0; i < 1000; ++i) {
    const double x = kernel_sample(0, 1, {30, 31}, rng);
    ASSERT_GE(x, 30);
    ASSERT_LE(x, 31);
  }
}

TEST(KernelSampleTest, WideSupportMoments) {
  Rng rng = make_stream(5, {});
  const int reps = 100000;
  double s = 0, s2 = 0;
  for (int i = 0; i < reps; ++i) {
    const double x = kernel_sample(0, 1, {-1e6, 1e6}, rng);
    s += x;
    s2 += x * x;
  }
  const double mean = s / reps;
  EXPECT_NEAR(mean, 0, 0.02);
  EXPECT_NEAR(std::sqrt(s2 / reps - mean * mean), 1, 0.02);
}

// Clustered geography with attributes that depend on location.
Dataset spatial_dataset(std::size_t n, std::uint64_t seed) {
  Rng rng = make_stream(seed, {99});
  std::vector<double> lon(n), lat(n), key(n), age(n), race(n), sex(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool east = uniform_open(rng) < 0.5;
    lon[i] = std::clamp((east ? 70.0 : 30.0) + 10 * standard_normal(rng), 1.0, 100.0);
    lat[i] = std::clamp(50.0 + 15 * standard_normal(rng), 1.0, 100.0);
    key[i] = static_cast<double>(i);
    age[i] = std::round(std::clamp(45 + lon[i] / 5 + 12 * standard_normal(rng), 16.0, 99.0));
    race[i] = uniform_open(rng) < (east ? 0.7 : 0.2) ? 1 : 0;
    sex[i] = uniform_open(rng) < 0.5 ? 1 : 0;
  }
  const Schema s({continuous("lon", VariableRole::kLongitude),
                  continuous("lat", VariableRole::kLatitude), continuous("key"),
                  continuous("age"), categorical("race", {"white", "black"}),
                  categorical("sex", {"female", "male"})});
  return Dataset(s, {lon, lat, key, age, race, sex});
}

TEST(PlanTest, Validation) {
  const Dataset ds = spatial_dataset(50, 1);
  SynthesisPlan plan = SynthesisPlan::geography(ds.schema(), 1.0);
  EXPECT_NO_THROW(plan.validate(ds.schema()));
  plan.order.push_back("nope");
  EXPECT_THROW(plan.validate(ds.schema()), ConfigError);
  SynthesisPlan bad = SynthesisPlan::geography(ds.schema(), 1.0);
  bad.order = {"age", "lon"};
  bad.bandwidths["age"] = 2;
  EXPECT_THROW(bad.validate(ds.schema()), ConfigError);
  SynthesisPlan small = SynthesisPlan::geography(ds.schema(), 1.0);
  small.m = 1;
  EXPECT_THROW(small.validate(ds.schema()), ConfigError);
  SynthesisPlan neg = SynthesisPlan::geography(ds.schema(), -1.0);
  EXPECT_THROW(neg.validate(ds.schema()), ConfigError);
  EXPECT_THROW(generate_release(ds, plan), ConfigError);
}

TEST(PlanTest, ConditioningSets) {
  const Dataset ds = spatial_dataset(20, 1);
  const SynthesisPlan plan =
      SynthesisPlan::geography_age_race(ds.schema(), 1.0, "age", "race");
  using V = std::vector<std::string>;
  EXPECT_EQ(conditioning_set(ds.schema(), plan, 0), (V{"key", "sex"}));
  EXPECT_EQ(conditioning_set(ds.schema(), plan, 1), (V{"key", "sex", "lon"}));
  EXPECT_EQ(conditioning_set(ds.schema(), plan, 2), (V{"key", "sex", "lon", "lat"}));
  EXPECT_EQ(conditioning_set(ds.schema(), plan, 3),
            (V{"key", "sex", "lon", "lat", "age"}));
}

TEST(SynthesizeTest, ReproductionLimit) {
  const Dataset ds = spatial_dataset(300, 2);
  SynthesisPlan plan = SynthesisPlan::geography_age_race(ds.schema(), 0.0, "age", "race", 0.0);
  plan.tree_params.min_node_size = 1;
  plan.tree_params.min_dev_fraction = 0;
  plan.seed = 17;
  const SyntheticRelease rel = generate_release(ds, plan);
  ASSERT_EQ(rel.m(), 5u);
  for (const Dataset& d : rel.datasets) {
    for (std::size_t j = 0; j < ds.n_cols(); ++j) {
      for (std::size_t i = 0; i < ds.n_rows(); ++i) ASSERT_EQ(d.value(i, j), ds.value(i, j));
    }
  }
}

TEST(SynthesizeTest, RootOnlyTreeDrawsFromMarginal) {
  const Dataset ds = spatial_dataset(1000, 3);
  Rng rng = make_stream(8, {});
  const std::vector<double> col = synthesize_column(
      ds, "lon", std::vector<std::string>{}, {}, 1.0, {}, rng);
  const auto orig = ds.column("lon");
  const double mo = std::accumulate(orig.begin(), orig.end(), 0.0) / 1000;
  const double ms = std::accumulate(col.begin(), col.end(), 0.0) / 1000;
  double ss = 0;
  for (double v : orig) ss += (v - mo) * (v - mo);
  const double se = std::sqrt(ss / 999 / 1000);
  EXPECT_LT(std::abs(ms - mo), 3 * se);
  EXPECT_THROW(synthesize_column(ds, "lon", std::vector<std::string>{"lon"}, {}, 1, {}, rng),
               ConfigError);
}

TEST(SynthesizeTest, PureCategoricalLeavesReproduce) {
  const Dataset base = spatial_dataset(200, 4);
  // race is a deterministic function of sex here.
  const Dataset ds = base.with_column(4, std::vector<double>(base.column(5).begin(),
                                                              base.column(5).end()));
  Rng rng = make_stream(9, {});
  const auto col = synthesize_column(ds, "race", std::vector<std::string>{"sex"}, {}, 0, {}, rng);
  for (std::size_t i = 0; i < ds.n_rows(); ++i) EXPECT_EQ(col[i], ds.value(i, 4));
}

TEST(ReleaseTest, GeographyOnlyKeepsOtherColumns) {
  const Dataset ds = spatial_dataset(400, 5);
  SynthesisPlan plan = SynthesisPlan::geography(ds.schema(), 1.0);
  plan.seed = 3;
  const SyntheticRelease rel = generate_release(ds, plan);
  ASSERT_EQ(rel.m(), 5u);
  for (const Dataset& d : rel.datasets) {
    for (std::size_t j = 2; j < ds.n_cols(); ++j) {
      for (std::size_t i = 0; i < ds.n_rows(); ++i) ASSERT_EQ(d.value(i, j), ds.value(i, j));
    }
    bool moved = false;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) moved |= d.value(i, 0) != ds.value(i, 0);
    EXPECT_TRUE(moved);
  }
}

TEST(ReleaseTest, AgeAndRaceChange) {
  const Dataset ds = spatial_dataset(2000, 6);
  SynthesisPlan plan = SynthesisPlan::geography_age_race(ds.schema(), 1.0, "age", "race");
  plan.seed = 4;
  const SyntheticRelease rel = generate_release(ds, plan);
  for (const Dataset& d : rel.datasets) {
    std::size_t age_diff = 0, race_diff = 0;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
      age_diff += d.value(i, 3) != ds.value(i, 3);
      race_diff += d.value(i, 4) != ds.value(i, 4);
    }
    EXPECT_GE(age_diff, 1u);
    EXPECT_GE(race_diff, 1u);
  }
}

TEST(ReleaseTest, SupportConfinement) {
  const Dataset ds = spatial_dataset(600, 7);
  SynthesisPlan plan = SynthesisPlan::geography_age_race(ds.schema(), 10.0, "age", "race");
  plan.seed = 5;
  const SyntheticRelease rel = generate_release(ds, plan);
  for (std::size_t l = 0; l < rel.m(); ++l) {
    for (std::size_t k = 0; k < 3; ++k) {
      const std::size_t col = ds.schema().index_of(plan.order[k]);
      for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        const cart::CartNode& node = rel.trees[k]->node(rel.generating_nodes[l][k][i]);
        const double v = rel.datasets[l].value(i, col);
        ASSERT_GE(v, node.value_min);
        ASSERT_LE(v, node.value_max);
      }
    }
  }
}

TEST(ReleaseTest, DeterminismAndStreams) {
  const Dataset ds = spatial_dataset(300, 8);
  SynthesisPlan plan = SynthesisPlan::geography(ds.schema(), 5.0);
  plan.seed = 11;
  plan.threads = 3;
  const SyntheticRelease a = generate_release(ds, plan);
  plan.threads = 1;
  const SyntheticRelease b = generate_release(ds, plan);
  for (std::size_t l = 0; l < 5; ++l) {
    EXPECT_EQ(format_csv(a.datasets[l]), format_csv(b.datasets[l]));
  }
  plan.seed = 12;
  const SyntheticRelease c = generate_release(ds, plan);
  EXPECT_NE(format_csv(a.datasets[0]), format_csv(c.datasets[0]));
  // Replicate l depends only on (seed, l).
  plan.seed = 11;
  plan.m = 3;
  const SyntheticRelease d = generate_release(ds, plan);
  for (std::size_t l = 0; l < 3; ++l) {
    EXPECT_EQ(format_csv(d.datasets[l]), format_csv(a.datasets[l]));
  }
  Rng rng = make_stream(11, {2});
  const Replicate r = draw_replicate(ds, plan, a.trees, rng);
  EXPECT_EQ(format_csv(r.data), format_csv(a.datasets[2]));
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  return d;
}

TEST(ReleaseTest, MarginalPreservation) {
  const Dataset ds = spatial_dataset(2000, 9);
  SynthesisPlan plan = SynthesisPlan::geography_age_race(ds.schema(), 1.0, "age", "race", 1.0);
  plan.seed = 6;
  const SyntheticRelease rel = generate_release(ds, plan);
  for (const std::string name : {"lon", "lat", "age"}) {
    std::vector<double> pooled;
    for (const Dataset& d : rel.datasets) {
      const auto c = d.column(name);
      pooled.insert(pooled.end(), c.begin(), c.end());
    }
    const auto o = ds.column(name);
    EXPECT_LE(ks_distance({o.begin(), o.end()}, pooled), 0.05) << name;
  }
  double p_orig = 0, p_syn = 0;
  for (std::size_t i = 0; i < 2000; ++i) p_orig += ds.value(i, 4);
  for (const Dataset& d : rel.datasets) {
    for (std::size_t i = 0; i < 2000; ++i) p_syn += d.value(i, 4);
  }
  EXPECT_NEAR(p_syn / 10000, p_orig / 2000, 0.05);
}

TEST(ReleaseTest, PerRecordBootstrapOption) {
  const Dataset ds = spatial_dataset(300, 10);
  SynthesisPlan plan = SynthesisPlan::geography(ds.schema(), 1.0);
  plan.seed = 2;
  const SyntheticRelease a = generate_release(ds, plan);
  plan.per_record_bootstrap = true;
  const SyntheticRelease b = generate_release(ds, plan);
  EXPECT_NE(format_csv(a.datasets[0]), format_csv(b.datasets[0]));
}

TEST(ReleaseIoTest, WriteAndReadBack) {
  testing::TempDir dir;
  const Dataset ds = spatial_dataset(100, 11);
  SynthesisPlan plan = SynthesisPlan::geography(ds.schema(), 5.0);
  plan.seed = 42;
  for (MetadataLevel level :
       {MetadataLevel::kEmpty, MetadataLevel::kRulesOnly, MetadataLevel::kFull}) {
    const SyntheticRelease rel = generate_release(ds, plan, level);
    const std::string out = dir.file(std::string(to_string(level)));
    const auto paths = write_release(out, rel);
    EXPECT_EQ(paths.size(), 7u);
    EXPECT_TRUE(std::filesystem::exists(out + "/synth_5.csv"));
    const LoadedRelease back = read_release(out);
    ASSERT_EQ(back.datasets.size(), 5u);
    EXPECT_EQ(format_csv(back.datasets[3]), format_csv(rel.datasets[3]));
    const auto meta = nlohmann::json::parse(back.metadata_json);
    EXPECT_EQ(meta["m"].get<int>(), 5);
    EXPECT_EQ(meta["trees"].size(), level == MetadataLevel::kEmpty ? 0u : 2u);
    EXPECT_EQ(meta.contains("seed"), level == MetadataLevel::kFull);
    EXPECT_DOUBLE_EQ(meta["bandwidths"]["lon"].get<double>(), 5.0);
  }
}

}  // namespace
}  // namespace geosynth

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
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "geosynth/errors.hpp"
#include "geosynth/risk.hpp"
#include "test_util.hpp"

namespace geosynth {
namespace {

using testing::categorical;
using testing::continuous;

Schema geo_schema() {
  return Schema({continuous("lon", VariableRole::kLongitude),
                 continuous("lat", VariableRole::kLatitude),
                 categorical("sex", {"female", "male"}), continuous("age")});
}

Dataset clustered(std::size_t n, std::uint64_t seed) {
  Rng rng = make_stream(seed, {7});
  std::vector<double> lon(n), lat(n), sex(n), age(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool east = uniform_open(rng) < 0.5;
    lon[i] = std::clamp((east ? 70.0 : 30.0) + 8 * standard_normal(rng), 1.0, 100.0);
    lat[i] = std::clamp(50.0 + 12 * standard_normal(rng), 1.0, 100.0);
    sex[i] = uniform_open(rng) < (east ? 0.7 : 0.3) ? 1 : 0;
    age[i] = std::round(std::clamp(40 + lon[i] / 4 + 10 * standard_normal(rng), 16.0, 99.0));
  }
  return Dataset(geo_schema(), {lon, lat, sex, age});
}

double tn_density(double y, double a, double h, double lo, double hi) {
  if (y < lo || y > hi) return 0;
  const auto cdf = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
  const double z = cdf((hi - a) / h) - cdf((lo - a) / h);
  return std::exp(-(y - a) * (y - a) / (2 * h * h)) /
         (h * std::sqrt(2 * M_PI)) / z;
}

double mixture(std::vector<double> atoms, double y, double h) {
  const auto [lo, hi] = std::minmax_element(atoms.begin(), atoms.end());
  double s = 0;
  for (double a : atoms) s += tn_density(y, a, h, *lo, *hi);
  return s / static_cast<double>(atoms.size());
}

TEST(GeoRiskTest, TwoPointPosterior) {
  const Dataset orig = clustered(50, 1);
  const Point truth{10, 10};
  GeoPosterior post{{{13, 10}, {10, 14}}, {0.5, 0.5}, false};
  const GeoRiskRecord r = geo_risk(post, truth, orig, 3);
  EXPECT_NEAR(r.r1, std::sqrt(12.5), 1e-15);
  EXPECT_EQ(r.record_id, 3);
  std::size_t inside = 0;
  for (std::size_t j = 0; j < orig.n_rows(); ++j) {
    const double dx = orig.value(j, 0) - truth.x;
    const double dy = orig.value(j, 1) - truth.y;
    inside += dx * dx + dy * dy <= 12.5;
  }
  EXPECT_EQ(r.r2, inside);
}

TEST(GeoRiskTest, PointMassAtTruthCountsColocated) {
  std::vector<double> lon{5, 5, 5, 6, 50}, lat{7, 7, 7, 7, 50};
  const Dataset orig(geo_schema(), {lon, lat, {0, 1, 0, 1, 0}, {30, 40, 50, 60, 70}});
  GeoPosterior post{{{5, 7}}, {1.0}, false};
  const GeoRiskRecord r = geo_risk(post, {5, 7}, orig);
  EXPECT_EQ(r.r1, 0.0);
  EXPECT_EQ(r.r2, 3u);
}

TEST(GeoRiskTest, R1BoundedByDomainDiagonal) {
  const Dataset orig = clustered(20, 2);
  GeoPosterior post{{{100, 100}}, {1.0}, false};
  const GeoRiskRecord r = geo_risk(post, {1, 1}, orig);
  EXPECT_LE(r.r1, 100 * std::sqrt(2.0));
  EXPECT_EQ(r.r2, orig.n_rows());
}

TEST(GeoRiskTest, QuantileSummary) {
  const QuantileSummary q = quantile_summary({5, 1, 4, 2, 3});
  EXPECT_EQ(q.alpha0, 1);
  EXPECT_EQ(q.alpha25, 2);
  EXPECT_EQ(q.alpha50, 3);
  EXPECT_DOUBLE_EQ(quantile_summary({0, 1}).alpha25, 0.25);
  EXPECT_THROW(quantile_summary({}), ConfigError);
}

TEST(GeoRiskTest, PriorGrid) {
  PriorSpec p;
  const auto pts = prior_grid(p, {50, 50});
  ASSERT_EQ(pts.size(), 441u);
  EXPECT_NE(std::find(pts.begin(), pts.end(), Point{50, 50}), pts.end());
  EXPECT_NE(std::find(pts.begin(), pts.end(), Point{45, 55}), pts.end());
  // Clipped at the corner of the domain.
  EXPECT_EQ(prior_grid(p, {1, 1}).size(), 121u);
}

TEST(GeoRiskTest, HighNeedsTreeStructure) {
  IntruderScenario s;
  s.metadata_level = MetadataLevel::kEmpty;
  EXPECT_THROW(s.validate(), ConfigError);
  s.knowledge = Knowledge::kLow;
  EXPECT_NO_THROW(s.validate());
}

// Root-only trees: the likelihood is a product of two leaf mixtures whose
// atoms are the other records' coordinates plus the candidate.
TEST(GeoPosteriorTest, MatchesBruteForceOracleForRootOnlyTrees) {
  const Dataset orig = clustered(12, 3);
  SynthesisPlan plan = SynthesisPlan::geography(orig.schema(), 6.0);
  plan.m = 2;
  plan.seed = 11;
  plan.tree_params.min_node_size = 1000;
  SyntheticRelease rel = generate_release(orig, plan);
  ASSERT_TRUE(rel.trees[0]->root().is_leaf());
  ASSERT_TRUE(rel.trees[1]->root().is_leaf());

  IntruderScenario s;
  s.prior.extent = Extent{{20, 60}, {30, 40}};
  s.prior.nx = 5;
  s.prior.ny = 2;
  const std::size_t target = 4;

  for (std::size_t m : {1u, 2u}) {
    SyntheticRelease r = rel;
    r.datasets.resize(m);
    const GeoPosterior post = geo_posterior(r, orig, target, s);
    ASSERT_EQ(post.support.size(), 10u);
    EXPECT_FALSE(post.degenerate);
    std::vector<double> oracle;
    for (const Point c : post.support) {
      double L = 1;
      for (std::size_t l = 0; l < m; ++l) {
        std::vector<double> a1, a2;
        for (std::size_t j = 0; j < orig.n_rows(); ++j) {
          if (j == target) continue;
          a1.push_back(orig.value(j, 0));
          a2.push_back(orig.value(j, 1));
        }
        a1.push_back(c.x);
        a2.push_back(c.y);
        L *= mixture(a1, r.datasets[l].value(target, 0), 6.0) *
             mixture(a2, r.datasets[l].value(target, 1), 6.0);
      }
      oracle.push_back(L);
    }
    const double total = std::accumulate(oracle.begin(), oracle.end(), 0.0);
    for (std::size_t c = 0; c < oracle.size(); ++c) {
      EXPECT_NEAR(post.weights[c], oracle[c] / total, 1e-12) << "m=" << m << " c=" << c;
    }
  }
}

TEST(GeoPosteriorTest, LowScenarioConcentratesAsBandwidthVanishes) {
  const Dataset orig = clustered(30, 4);
  for (double h : {1e-7, 0.0}) {
    SynthesisPlan plan = SynthesisPlan::geography(orig.schema(), h);
    SyntheticRelease rel;
    rel.plan = plan;
    const Dataset d = orig.with_column(0, std::vector<double>(30, 42.0))
                          .with_column(1, std::vector<double>(30, 17.0));
    rel.datasets.assign(5, d);
    IntruderScenario s;
    s.knowledge = Knowledge::kLow;
    s.metadata_level = MetadataLevel::kEmpty;
    const GeoPosterior post = geo_posterior(rel, orig, 0, s);
    double total = 0;
    for (std::size_t k = 0; k < post.support.size(); ++k) {
      total += post.weights[k];
      EXPECT_NEAR(post.support[k].x, 42.0, 1e-6);
      EXPECT_NEAR(post.support[k].y, 17.0, 1e-6);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_LT(geo_risk(post, {42, 17}, orig).r1, 1e-6);
  }
}

TEST(GeoPosteriorTest, LowScenarioStencilStaysInDomain) {
  const Dataset orig = clustered(30, 4);
  SyntheticRelease rel;
  rel.plan = SynthesisPlan::geography(orig.schema(), 5.0);
  rel.datasets.assign(2, orig.with_column(0, std::vector<double>(30, 1.0)));
  IntruderScenario s;
  s.knowledge = Knowledge::kLow;
  const GeoPosterior post = geo_posterior(rel, orig, 0, s);
  double total = 0;
  for (std::size_t k = 0; k < post.support.size(); ++k) {
    EXPECT_GE(post.support[k].x, 1.0);
    total += post.weights[k];
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(GeoPosteriorTest, PriorExcludingTruthExcludesIt) {
  const Dataset orig = clustered(200, 5);
  SynthesisPlan plan = SynthesisPlan::geography(orig.schema(), 2.0);
  plan.seed = 3;
  const SyntheticRelease rel = generate_release(orig, plan);
  IntruderScenario s;
  const Point truth = record_location(orig, 0);
  s.prior.extent = Extent{{truth.x + 5, truth.x + 15}, {truth.y + 5, truth.y + 15}};
  s.prior.nx = s.prior.ny = 5;
  const GeoPosterior post = geo_posterior(rel, orig, 0, s);
  for (const Point p : post.support) EXPECT_FALSE(p == truth);
  EXPECT_NEAR(std::accumulate(post.weights.begin(), post.weights.end(), 0.0), 1.0, 1e-12);
}

TEST(GeoPosteriorTest, FittedTreesGiveProbabilityVectors) {
  const Dataset orig = clustered(300, 6);
  for (double h : {0.0, 1.0, 5.0}) {
    SynthesisPlan plan = SynthesisPlan::geography(orig.schema(), h);
    plan.seed = 8;
    const SyntheticRelease rel = generate_release(orig, plan);
    IntruderScenario s;
    for (std::size_t i : {0u, 17u, 123u, 299u}) {
      const GeoPosterior post = geo_posterior(rel, orig, i, s);
      double total = 0;
      for (double w : post.weights) {
        EXPECT_GE(w, 0.0);
        total += w;
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
      EXPECT_FALSE(post.degenerate) << "h=" << h << " i=" << i;
      const Point truth = record_location(orig, i);
      const auto it = std::find(post.support.begin(), post.support.end(), truth);
      ASSERT_NE(it, post.support.end());
      EXPECT_GT(post.weights[static_cast<std::size_t>(it - post.support.begin())], 0.0);
    }
  }
}

TEST(GeoPosteriorTest, RedactedTreesAreRefilledFromOriginal) {
  const Dataset orig = clustered(300, 7);
  SynthesisPlan plan = SynthesisPlan::geography(orig.schema(), 1.0);
  plan.seed = 2;
  const SyntheticRelease full = generate_release(orig, plan);
  SyntheticRelease rules = full;
  rules.metadata_level = MetadataLevel::kRulesOnly;
  for (auto& t : rules.trees) {
    const std::string text = cart::tree_to_json(*t, orig.schema(), MetadataLevel::kRulesOnly, 1.0);
    const cart::CartTree shape = cart::tree_from_json(text, orig.schema());
    const cart::CartTree refilled = cart::refill_tree(shape, orig);
    ASSERT_EQ(refilled.nodes().size(), t->nodes().size());
    for (std::size_t k = 0; k < t->nodes().size(); ++k) {
      EXPECT_EQ(refilled.nodes()[k].member_rows, t->nodes()[k].member_rows);
      EXPECT_EQ(refilled.nodes()[k].values, t->nodes()[k].values);
      EXPECT_EQ(refilled.nodes()[k].deviance, t->nodes()[k].deviance);
    }
    t = std::make_shared<const cart::CartTree>(shape);
  }
  IntruderScenario s;
  s.metadata_level = MetadataLevel::kRulesOnly;
  const auto a = geo_risk_all(full, orig, s, std::vector<std::size_t>{1, 2, 3});
  const auto b = geo_risk_all(rules, orig, s, std::vector<std::size_t>{1, 2, 3});
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(a[k].r1, b[k].r1);
    EXPECT_EQ(a[k].r2, b[k].r2);
    EXPECT_GE(a[k].r2, 1u);
  }
}

TEST(GeoPosteriorTest, ConcurrentMatchesSequential) {
  const Dataset orig = clustered(200, 9);
  SynthesisPlan plan = SynthesisPlan::geography(orig.schema(), 1.0);
  const SyntheticRelease rel = generate_release(orig, plan);
  IntruderScenario s;
  const auto a = geo_risk_all(rel, orig, s, {}, 1);
  const auto b = geo_risk_all(rel, orig, s, {}, 3);
  ASSERT_EQ(a.size(), 200u);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].r1, b[k].r1);
    EXPECT_EQ(a[k].record_id, orig.record_id(k));
  }
}

TEST(MatchSummaryTest, HandComputedFixture) {
  const std::vector<std::size_t> c{2, 1, 1, 3};
  const std::vector<int> g{1, 1, 0, 0};
  const MatchRiskSummary s = match_risk_from_counts(c, g);
  EXPECT_DOUBLE_EQ(s.expected, 0.375);
  EXPECT_DOUBLE_EQ(s.true_rate, 0.25);
  ASSERT_TRUE(s.false_rate.has_value());
  EXPECT_DOUBLE_EQ(*s.false_rate, 0.5);
}

TEST(MatchSummaryTest, AllCorrectAndUniform) {
  const std::size_t n = 4;
  std::vector<std::vector<double>> exact(n, std::vector<double>(n + 1, 0.0));
  std::vector<std::vector<double>> uniform(n, std::vector<double>(n + 1, 0.25));
  std::vector<std::optional<std::size_t>> truth;
  for (std::size_t t = 0; t < n; ++t) {
    exact[t][t] = 1.0;
    uniform[t][n] = 0.0;
    truth.emplace_back(t);
  }
  const MatchRiskSummary a = match_risk_summary(exact, truth);
  EXPECT_EQ(a.expected, 1.0);
  EXPECT_EQ(a.true_rate, 1.0);
  EXPECT_EQ(a.false_rate.value(), 0.0);
  const MatchRiskSummary b = match_risk_summary(uniform, truth);
  EXPECT_DOUBLE_EQ(b.expected, 1.0 / n);
  EXPECT_EQ(b.true_rate, 0.0);
  EXPECT_FALSE(b.false_rate.has_value());
}

// Ten released records keyed by (sex, age); nothing the intruder knows is
// synthesized.
struct KeyFixture {
  Dataset released;
  SyntheticRelease release;
  SynthesisPlan plan;
  IntruderScenario scenario;

  KeyFixture() {
    std::vector<double> lon(10), lat(10), sex(10), age(10);
    for (std::size_t j = 0; j < 10; ++j) {
      lon[j] = 10.0 + static_cast<double>(j);
      lat[j] = 20.0;
      sex[j] = static_cast<double>(j % 2);
      age[j] = 30.0 + static_cast<double>(j);
    }
    age[5] = age[3];  // records 3 and 5 agree on both keys
    released = Dataset(geo_schema(), {lon, lat, sex, age});
    plan = SynthesisPlan::geography(released.schema(), 1.0);
    release.plan = plan;
    release.datasets.assign(2, released);
    scenario.metadata_level = MetadataLevel::kEmpty;
    scenario.known_quasi_identifiers = {"sex", "age"};
  }

  std::vector<double> probs_for(std::size_t row) {
    const std::vector<std::size_t> rows{row};
    const Dataset t = released.select_rows(rows);
    Rng rng(1);
    auto imp = make_released_values_imputer(release);
    return match_probabilities(released, plan, t, scenario, *imp, rng).front();
  }
};

TEST(MatchProbabilityTest, ExactMatchLimit) {
  KeyFixture f;
  const auto p = f.probs_for(7);
  ASSERT_EQ(p.size(), 11u);
  EXPECT_EQ(p[7], 1.0);
  EXPECT_EQ(std::accumulate(p.begin(), p.end(), 0.0), 1.0);
}

TEST(MatchProbabilityTest, TiesShareEqually) {
  KeyFixture f;
  const auto p = f.probs_for(3);
  EXPECT_EQ(p[3], 0.5);
  EXPECT_EQ(p[5], 0.5);
}

TEST(MatchProbabilityTest, NoKeyMatch) {
  KeyFixture f;
  const Dataset t = f.released.with_column(3, std::vector<double>(10, 99.0))
                        .select_rows(std::vector<std::size_t>{0});
  auto imp = make_released_values_imputer(f.release);
  Rng rng(1);
  auto p = match_probabilities(f.released, f.plan, t, f.scenario, *imp, rng).front();
  for (std::size_t j = 0; j < 10; ++j) EXPECT_DOUBLE_EQ(p[j], 0.1);
  EXPECT_EQ(p[10], 0.0);
  f.scenario.sample_membership_known = false;
  p = match_probabilities(f.released, f.plan, t, f.scenario, *imp, rng).front();
  EXPECT_EQ(p[10], 1.0);
}

TEST(MatchProbabilityTest, MissingQuasiIdentifierIsRejected) {
  KeyFixture f;
  f.scenario.known_quasi_identifiers = {"sex", "income"};
  auto imp = make_released_values_imputer(f.release);
  Rng rng(1);
  EXPECT_THROW(match_probabilities(f.released, f.plan, f.released, f.scenario, *imp, rng),
               SchemaError);
}

// Each record's imputed longitude is one of two values; all 8 outcomes are
// enumerated with equal weight.
class EnumeratingImputer : public Imputer {
 public:
  EnumeratingImputer(std::vector<std::array<double, 2>> lon, std::vector<double> lat)
      : lon_(std::move(lon)), lat_(std::move(lat)) {}
  std::size_t size() const override { return std::size_t{1} << lon_.size(); }
  std::vector<std::vector<double>> impute(std::size_t index, Rng&) const override {
    std::vector<double> lon(lon_.size());
    for (std::size_t j = 0; j < lon_.size(); ++j) lon[j] = lon_[j][(index >> j) & 1];
    return {lon, lat_};
  }

 private:
  std::vector<std::array<double, 2>> lon_;
  std::vector<double> lat_;
};

TEST(MatchProbabilityTest, ToyReleaseMatchesFullEnumeration) {
  const std::vector<double> lon{10, 12, 30}, lat{5, 6, 5}, sex{0, 0, 1}, age{40, 41, 42};
  const Dataset orig(geo_schema(), {lon, lat, sex, age});
  const std::vector<std::array<double, 2>> options{{11, 14}, {9, 13}, {29, 31}};
  const std::vector<double> released_lat{6, 5, 5};
  const Dataset released = orig.with_column(0, {11, 9, 29}).with_column(1, released_lat);
  const SynthesisPlan plan = SynthesisPlan::geography(orig.schema(), 1.0);
  IntruderScenario s;
  s.known_quasi_identifiers = {"lon", "lat", "sex"};
  EnumeratingImputer imp(options, released_lat);
  Rng rng(5);
  const auto probs = match_probabilities(released, plan, orig, s, imp, rng);

  for (std::size_t t = 0; t < 3; ++t) {
    std::vector<double> expect(4, 0.0);
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        for (int c = 0; c < 2; ++c) {
          const double cand[3] = {options[0][a], options[1][b], options[2][c]};
          std::vector<std::size_t> best;
          double bd = 1e300;
          for (std::size_t j = 0; j < 3; ++j) {
            if (sex[j] != sex[t]) continue;
            const double d = std::hypot(cand[j] - lon[t], released_lat[j] - lat[t]);
            if (d < bd) {
              bd = d;
              best = {j};
            } else if (d == bd) {
              best.push_back(j);
            }
          }
          for (std::size_t j : best) expect[j] += 1.0 / 8 / static_cast<double>(best.size());
        }
      }
    }
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_NEAR(probs[t][j], expect[j], 1e-15) << "t=" << t << " j=" << j;
    }
  }
  EXPECT_EQ(probs[2][2], 1.0);
}

struct GeneratedRelease {
  Dataset orig;
  SyntheticRelease release;
  IntruderScenario scenario;

  explicit GeneratedRelease(MetadataLevel level) : orig(clustered(400, 12)) {
    SynthesisPlan plan = SynthesisPlan::geography(orig.schema(), 1.0);
    plan.m = 3;
    plan.seed = 4;
    release = generate_release(orig, plan, level);
    scenario.metadata_level = level;
    scenario.known_quasi_identifiers = {"lon", "lat", "sex", "age"};
  }
};

TEST(ImputerTest, NodePoolsDrawReleasedValues) {
  GeneratedRelease g(MetadataLevel::kRulesOnly);
  auto imp = make_node_pool_imputer(g.release, 4);
  EXPECT_EQ(imp->size(), 12u);
  std::set<double> released;
  for (const auto& d : g.release.datasets) {
    for (double v : d.column(0)) released.insert(v);
  }
  Rng rng(3);
  const auto draw = imp->impute(0, rng);
  ASSERT_EQ(draw.size(), 2u);
  for (double v : draw[0]) EXPECT_TRUE(released.count(v));
}

TEST(ImputerTest, TreeAtomsDrawOriginalValues) {
  GeneratedRelease g(MetadataLevel::kFull);
  auto imp = make_tree_atom_imputer(g.release, 2);
  std::set<double> original(g.orig.column(1).begin(), g.orig.column(1).end());
  Rng rng(3);
  const auto draw = imp->impute(0, rng);
  for (double v : draw[1]) EXPECT_TRUE(original.count(v));
}

TEST(MatchProbabilityTest, ProbabilitiesSumToOne) {
  for (MetadataLevel level :
       {MetadataLevel::kEmpty, MetadataLevel::kRulesOnly, MetadataLevel::kFull}) {
    GeneratedRelease g(level);
    auto imp = make_imputer(g.release, level, 5);
    Rng rng(9);
    const auto probs = match_probabilities(g.release.datasets.front(), g.release.plan,
                                           g.orig, g.scenario, *imp, rng, 2);
    ASSERT_EQ(probs.size(), 400u);
    for (const auto& p : probs) {
      EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
      EXPECT_EQ(p.back(), 0.0);
    }
    std::vector<std::optional<std::size_t>> truth;
    for (std::size_t t = 0; t < 400; ++t) truth.emplace_back(t);
    const MatchRiskSummary s = match_risk_summary(probs, truth);
    EXPECT_GE(s.expected, 0.0);
    EXPECT_LE(s.expected, 1.0);
    EXPECT_LE(s.true_rate, s.expected + 1e-12);
  }
}

TEST(MatchProbabilityTest, ThreadCountDoesNotChangeResult) {
  GeneratedRelease g(MetadataLevel::kFull);
  auto imp = make_imputer(g.release, MetadataLevel::kFull, 3);
  Rng a(9), b(9);
  const auto p1 = match_probabilities(g.release.datasets.front(), g.release.plan, g.orig,
                                      g.scenario, *imp, a, 1);
  const auto p3 = match_probabilities(g.release.datasets.front(), g.release.plan, g.orig,
                                      g.scenario, *imp, b, 3);
  EXPECT_EQ(p1, p3);
}

}  // namespace
}  // namespace geosynth

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

#include "geosynth/inference.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "geosynth/errors.hpp"
#include "geosynth/random.hpp"
#include "test_util.hpp"

namespace geosynth {
namespace {

using testing::categorical;
using testing::continuous;

TEST(CombineTest, WorkedExampleOneTwoThree) {
  const std::vector<ReplicateEstimate> e{{1, 1}, {2, 1}, {3, 1}};
  const MiEstimate r = combine(e);
  EXPECT_DOUBLE_EQ(r.q_bar, 2);
  EXPECT_DOUBLE_EQ(r.b_m, 1);
  EXPECT_DOUBLE_EQ(r.T_m, 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.nu_m, 32);
}

TEST(CombineTest, WorkedExampleOutlier) {
  const std::vector<ReplicateEstimate> e{{0, 1}, {0, 1}, {0, 1}, {0, 1}, {10, 1}};
  const MiEstimate r = combine(e);
  EXPECT_DOUBLE_EQ(r.q_bar, 2);
  EXPECT_DOUBLE_EQ(r.b_m, 20);
  EXPECT_DOUBLE_EQ(r.T_m, 5);
  EXPECT_DOUBLE_EQ(r.nu_m, 6.25);
}

TEST(CombineTest, ZeroBetweenVarianceUsesNormal) {
  const std::vector<ReplicateEstimate> e(4, {3.5, 0.5});
  const MiEstimate r = combine(e);
  EXPECT_EQ(r.q_bar, 3.5);
  EXPECT_EQ(r.T_m, 0.5);
  EXPECT_TRUE(std::isinf(r.nu_m));
  const ConfidenceInterval ci = r.ci(0.95);
  EXPECT_NEAR(ci.hi - 3.5, 1.959963984540054 * std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(3.5 - ci.lo, ci.hi - 3.5, 1e-12);
}

TEST(CombineTest, ArityAndValidation) {
  const std::vector<ReplicateEstimate> one{{1, 1}};
  EXPECT_THROW(combine(one), ArityError);
  const std::vector<ReplicateEstimate> neg{{1, -1}, {1, 1}};
  EXPECT_THROW(combine(neg), ConfigError);
}

TEST(CombineTest, RandomInputsMatchTwoPassOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> msize(2, 20);
  std::normal_distribution<double> q(0, 10);
  std::exponential_distribution<double> u(1);
  for (int rep = 0; rep < 1000; ++rep) {
    const int m = msize(rng);
    std::vector<ReplicateEstimate> e(static_cast<std::size_t>(m));
    for (auto& x : e) x = {q(rng), u(rng)};
    long double qs = 0, us = 0;
    for (const auto& x : e) {
      qs += x.q;
      us += x.u;
    }
    const long double qb = qs / m, ub = us / m;
    long double ss = 0;
    for (const auto& x : e) ss += (x.q - qb) * (x.q - qb);
    const long double b = ss / (m - 1);
    const long double t = ub + b / m;
    const long double f = 1 + m * ub / b;
    const long double nu = (m - 1) * f * f;
    const MiEstimate r = combine(e);
    const double tol = 1e-12;
    EXPECT_NEAR(r.q_bar, static_cast<double>(qb), tol * std::max(1.0, std::abs(r.q_bar)));
    EXPECT_NEAR(r.b_m, static_cast<double>(b), tol * std::max(1.0, r.b_m));
    EXPECT_NEAR(r.T_m, static_cast<double>(t), tol * std::max(1.0, r.T_m));
    EXPECT_NEAR(r.nu_m, static_cast<double>(nu), tol * std::max(1.0, r.nu_m));
  }
}

TEST(CombineTest, PermutationInvarianceAndAffineEquivariance) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  std::vector<ReplicateEstimate> e(7);
  for (auto& x : e) x = {z(rng), std::abs(z(rng))};
  const MiEstimate r = combine(e);
  std::shuffle(e.begin(), e.end(), rng);
  const MiEstimate p = combine(e);
  EXPECT_NEAR(p.q_bar, r.q_bar, 1e-14);
  EXPECT_NEAR(p.T_m, r.T_m, 1e-14);
  EXPECT_NEAR(p.nu_m, r.nu_m, 1e-10 * r.nu_m);
  const double a = -3, c = 7;
  std::vector<ReplicateEstimate> t;
  for (const auto& x : e) t.push_back({a * x.q + c, a * a * x.u});
  const MiEstimate s = combine(t);
  EXPECT_NEAR(s.q_bar, a * r.q_bar + c, 1e-12);
  EXPECT_NEAR(s.T_m, a * a * r.T_m, 1e-12);
  EXPECT_NEAR(s.nu_m, r.nu_m, 1e-9 * r.nu_m);
}

TEST(CombineTest, IntervalUsesTQuantile) {
  const std::vector<ReplicateEstimate> e{{1, 1}, {2, 1}, {3, 1}};
  const ConfidenceInterval ci = combine(e).ci(0.95);
  // t_{32, 0.975} = 2.0369333434601011.
  EXPECT_NEAR(ci.hi, 2 + 2.0369333434601011 * std::sqrt(4.0 / 3.0), 1e-10);
  EXPECT_NEAR(ci.lo, 2 - 2.0369333434601011 * std::sqrt(4.0 / 3.0), 1e-10);
}

TEST(StudentTTest, ReferenceVectors) {
  std::ifstream in(std::string(GEOSYNTH_TEST_DATA) + "/t_quantiles.csv");
  ASSERT_TRUE(in) << "missing reference vectors";
  std::string line;
  std::getline(in, line);
  int count = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string a, b, c;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    std::getline(ss, c, ',');
    const double nu = std::stod(a), p = std::stod(b), want = std::stod(c);
    const double got = student_t_quantile(p, nu);
    EXPECT_NEAR(got, want, 1e-10 * std::max(1.0, std::abs(want))) << "nu=" << nu << " p=" << p;
    EXPECT_NEAR(student_t_quantile(1 - p, nu), -want, 1e-10 * std::max(1.0, std::abs(want)));
    ++count;
  }
  EXPECT_EQ(count, 90);
  EXPECT_NEAR(student_t_quantile(0.975, INFINITY), 1.959963984540054, 1e-14);
}

Schema est_schema() {
  return Schema({continuous("lon", VariableRole::kLongitude),
                 continuous("lat", VariableRole::kLatitude), continuous("x"),
                 categorical("c", {"a", "b"})});
}

TEST(EstimatorTest, MeanHandValues) {
  const Dataset ds(est_schema(), {{1, 2}, {1, 2}, {2, 4}, {0, 1}});
  const ReplicateEstimate e = estimate_mean(ds, "x");
  EXPECT_DOUBLE_EQ(e.q, 3);
  EXPECT_DOUBLE_EQ(e.u, 1);
  const Dataset flat(est_schema(), {{1, 2, 3}, {1, 2, 3}, {5, 5, 5}, {0, 1, 0}});
  EXPECT_EQ(estimate_mean(flat, "x").u, 0);
  const RowFilter all = std::vector<bool>(3, true);
  EXPECT_EQ(estimate_mean(flat, "x", all).q, estimate_mean(flat, "x").q);
  const RowFilter none = std::vector<bool>(3, false);
  EXPECT_THROW(estimate_mean(flat, "x", none), EmptyCellError);
  EXPECT_THROW(estimate_mean(flat, "c"), ConfigError);
}

TEST(EstimatorTest, ProportionHandValues) {
  const Dataset ds(est_schema(), {{1, 2, 3, 4}, {1, 2, 3, 4}, {0, 0, 0, 0}, {0, 0, 1, 1}});
  const ReplicateEstimate e = estimate_proportion(ds, "c", "a");
  EXPECT_DOUBLE_EQ(e.q, 0.5);
  EXPECT_DOUBLE_EQ(e.u, 0.0625);
  const RowFilter first_two = std::vector<bool>{true, true, false, false};
  EXPECT_EQ(estimate_proportion(ds, "c", "a", first_two).q, 1);
  EXPECT_EQ(estimate_proportion(ds, "c", "a", first_two).u, 0);
  const Dataset all_a(est_schema(), {{1, 2}, {1, 2}, {0, 0}, {0, 0}});
  EXPECT_EQ(estimate_proportion(all_a, "c", "b").q, 0);
  EXPECT_EQ(estimate_proportion(all_a, "c", "b").u, 0);
  EXPECT_THROW(estimate_proportion(ds, "c", "zzz"), SchemaError);
  EXPECT_DOUBLE_EQ(estimate_proportion_above(ds, "lon", 2.5).q, 0.5);
}

// Logistic data: logit p = b0 + b1 x + b2 [c = b].
Dataset logistic_data(std::size_t n, double b0, double b1, double b2, std::uint64_t seed) {
  Rng rng = make_stream(seed, {});
  std::vector<double> lon(n), lat(n), x(n), c(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    lon[i] = lat[i] = static_cast<double>(i);
    x[i] = standard_normal(rng);
    c[i] = uniform_open(rng) < 0.5 ? 1 : 0;
    const double p = 1 / (1 + std::exp(-(b0 + b1 * x[i] + b2 * c[i])));
    y[i] = uniform_open(rng) < p ? 1 : 0;
  }
  const Schema s({continuous("lon", VariableRole::kLongitude),
                  continuous("lat", VariableRole::kLatitude), continuous("x"),
                  categorical("c", {"a", "b"}), categorical("y", {"no", "yes"})});
  return Dataset(s, {lon, lat, x, c, y});
}

TEST(LogisticTest, RecoversSlope) {
  const Dataset ds = logistic_data(20000, 0.5, 1.0, 0.0, 3);
  const std::vector<std::string> preds{"x"};
  const LogisticFit fit = fit_logistic(ds, "y", preds);
  ASSERT_EQ(fit.names, (std::vector<std::string>{"(intercept)", "x"}));
  EXPECT_NEAR(fit.coefficients[1].q, 1.0, 0.05);
  EXPECT_NEAR(fit.coefficients[0].q, 0.5, 0.05);
  EXPECT_LT(fit.iterations, 15);
}

TEST(LogisticTest, NullCoefficientWithinThreeSe) {
  const Dataset ds = logistic_data(10000, 0.0, 0.0, 0.0, 4);
  const std::vector<std::string> preds{"c"};
  const LogisticFit fit = fit_logistic(ds, "y", preds);
  ASSERT_EQ(fit.names[1], "c[b]");
  EXPECT_LT(std::abs(fit.coefficients[1].q), 3 * std::sqrt(fit.coefficients[1].u));
}

TEST(LogisticTest, MatchesNewtonOracleOnSmallData) {
  // Closed form for a single binary predictor: coefficients are log-odds.
  const Dataset ds = logistic_data(3000, -0.3, 0.0, 0.8, 5);
  const std::vector<std::string> preds{"c"};
  const LogisticFit fit = fit_logistic(ds, "y", preds);
  double n[2] = {0, 0}, k[2] = {0, 0};
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    const int g = ds.code(i, 3);
    n[g] += 1;
    k[g] += ds.value(i, 4);
  }
  const double l0 = std::log(k[0] / (n[0] - k[0])), l1 = std::log(k[1] / (n[1] - k[1]));
  EXPECT_NEAR(fit.coefficients[0].q, l0, 1e-9);
  EXPECT_NEAR(fit.coefficients[1].q, l1 - l0, 1e-9);
  const double v0 = 1 / k[0] + 1 / (n[0] - k[0]);
  const double v1 = 1 / k[1] + 1 / (n[1] - k[1]);
  EXPECT_NEAR(fit.coefficients[0].u, v0, 1e-9);
  EXPECT_NEAR(fit.coefficients[1].u, v0 + v1, 1e-9);
}

TEST(LogisticTest, SeparationNamesPredictor) {
  std::vector<double> lon, lat, x, c, y;
  for (int i = 0; i < 20; ++i) {
    lon.push_back(i);
    lat.push_back(i);
    x.push_back(i);
    c.push_back(i % 2);
    y.push_back(i < 10 ? 0 : 1);
  }
  const Schema s({continuous("lon", VariableRole::kLongitude),
                  continuous("lat", VariableRole::kLatitude), continuous("x"),
                  categorical("c", {"a", "b"}), categorical("y", {"no", "yes"})});
  const Dataset ds(s, {lon, lat, x, c, y});
  const std::vector<std::string> preds{"c", "x"};
  try {
    fit_logistic(ds, "y", preds);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.predictor(), "x");
  }
  const std::vector<std::string> dup{"x", "lon"};
  try {
    fit_logistic(ds, "y", dup);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_FALSE(e.predictor().empty());
  }
}

}  // namespace
}  // namespace geosynth

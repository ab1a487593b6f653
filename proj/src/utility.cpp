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
#include <limits>
#include <numeric>

#include "geosynth/errors.hpp"
#include "geosynth/utility.hpp"

namespace geosynth {
namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

RowFilter region_filter(const std::vector<std::string>& labels,
                        const std::string& region) {
  std::vector<bool> keep(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) keep[i] = labels[i] == region;
  return keep;
}

}  // namespace

ReplicateEstimate Estimand::estimate(const Dataset& ds, const RowFilter& filter) const {
  ReplicateEstimate e;
  switch (kind) {
    case Kind::kMean:
      return estimate_mean(ds, variable, filter);
    case Kind::kPercentAt:
      e = estimate_proportion(ds, variable, level, filter);
      break;
    case Kind::kPercentAbove:
      e = estimate_proportion_above(ds, variable, threshold, filter);
      break;
  }
  return {100 * e.q, 1e4 * e.u};
}

std::vector<Estimand> standard_estimands() {
  return {
      {"% black", Estimand::Kind::kPercentAt, "race", "black", 0},
      {"% educ > 14.5", Estimand::Kind::kPercentAbove, "educ", "", 14.5},
      {"avg age", Estimand::Kind::kMean, "age", "", 0},
  };
}

std::vector<std::string> regions_of(const Dataset& ds, const RegionMap& regions) {
  return regions.assign_all(ds);
}

std::vector<DescriptiveRow> descriptive_comparison(
    const Dataset& original, const std::vector<std::vector<Dataset>>& reps,
    const RegionMap& regions, const std::vector<Estimand>& estimands) {
  if (reps.empty()) throw ConfigError("descriptive comparison needs at least one rep");
  const std::vector<std::string> orig_labels = regions_of(original, regions);
  std::vector<std::vector<std::vector<std::string>>> rep_labels(reps.size());
  for (std::size_t r = 0; r < reps.size(); ++r) {
    if (reps[r].empty()) throw ConfigError("rep " + std::to_string(r) + " has no datasets");
    for (const Dataset& d : reps[r]) rep_labels[r].push_back(regions_of(d, regions));
  }
  std::vector<DescriptiveRow> rows;
  for (const Estimand& est : estimands) {
    for (const std::string& region : regions.labels()) {
      DescriptiveRow row;
      row.estimand = est.name;
      row.region = region;
      row.percentage = est.is_percentage();
      try {
        row.Q = est.estimate(original, region_filter(orig_labels, region)).q;
      } catch (const EmptyCellError&) {
        continue;
      }
      std::vector<double> q;
      for (std::size_t r = 0; r < reps.size(); ++r) {
        std::vector<ReplicateEstimate> per;
        try {
          for (std::size_t l = 0; l < reps[r].size(); ++l) {
            per.push_back(est.estimate(reps[r][l], region_filter(rep_labels[r][l], region)));
          }
        } catch (const EmptyCellError&) {
          ++row.reps_flagged;
          continue;
        }
        q.push_back(per.size() == 1 ? per.front().q : combine(per).q_bar);
      }
      row.reps_used = q.size();
      if (!q.empty()) {
        row.median = median_of(q);
        double acc = 0;
        for (double v : q) acc += (v - row.Q) * (v - row.Q);
        row.mse = acc / static_cast<double>(q.size());
      } else {
        row.median = row.mse = std::numeric_limits<double>::quiet_NaN();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::size_t count_mse_above(std::span<const DescriptiveRow> rows, double limit) {
  std::size_t count = 0;
  for (const auto& r : rows) count += r.percentage && r.reps_used > 0 && r.mse > limit;
  return count;
}

std::vector<RegressionRow> regression_comparison(const Dataset& original,
                                                 std::span<const Dataset> synthetic,
                                                 const std::string& outcome,
                                                 std::span<const std::string> predictors) {
  const LogisticFit obs = fit_logistic(original, outcome, predictors);
  std::vector<LogisticFit> fits;
  for (const Dataset& d : synthetic) fits.push_back(fit_logistic(d, outcome, predictors));
  const std::vector<MiEstimate> mi = combine_logistic(fits);
  std::vector<RegressionRow> rows;
  for (std::size_t k = 0; k < obs.names.size(); ++k) {
    rows.push_back({obs.names[k], obs.coefficients[k].q, std::sqrt(obs.coefficients[k].u),
                    mi[k].q_bar, std::sqrt(mi[k].T_m)});
  }
  return rows;
}

double misclassification(const Eigen::VectorXd& beta, const Dataset& ds,
                         const std::string& outcome,
                         std::span<const std::string> predictors,
                         std::span<const std::size_t> rows, double threshold) {
  const Eigen::MatrixXd X = logistic_design(ds, predictors);
  if (X.cols() != beta.size()) {
    throw ConfigError("coefficient vector has " + std::to_string(beta.size()) +
                      " entries for " + std::to_string(X.cols()) + " design columns");
  }
  const Eigen::VectorXd y = binary_outcome(ds, outcome);
  const Eigen::VectorXd eta = X * beta;
  std::size_t wrong = 0;
  std::size_t total = 0;
  auto score = [&](std::size_t i) {
    const double pred = logistic(eta[static_cast<Eigen::Index>(i)]) > threshold ? 1.0 : 0.0;
    wrong += pred != y[static_cast<Eigen::Index>(i)];
    ++total;
  };
  if (rows.empty()) {
    for (std::size_t i = 0; i < ds.n_rows(); ++i) score(i);
  } else {
    for (std::size_t i : rows) score(i);
  }
  if (total == 0) throw EmptyCellError("no rows to classify");
  return static_cast<double>(wrong) / static_cast<double>(total);
}

TrainTestSplit train_test_split(std::size_t n, double test_fraction, Rng& rng) {
  if (!(test_fraction >= 0 && test_fraction < 1)) {
    throw ConfigError("test fraction must be in [0, 1)");
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t k = n; k > 1; --k) {
    const auto j = static_cast<std::size_t>(uniform_open(rng) * static_cast<double>(k));
    std::swap(idx[k - 1], idx[std::min(j, k - 1)]);
  }
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  TrainTestSplit s;
  s.test.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_test), idx.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

NoisyGeography add_geographic_noise(const Dataset& ds, std::span<const double> sd,
                                    Rng& rng) {
  if (sd.size() != ds.n_rows()) throw ConfigError("one noise sd per record is required");
  const Schema& schema = ds.schema();
  const std::size_t jx = schema.longitude();
  const std::size_t jy = schema.latitude();
  std::vector<double> x(ds.column(jx).begin(), ds.column(jx).end());
  std::vector<double> y(ds.column(jy).begin(), ds.column(jy).end());
  NoisyGeography out;
  out.clipped.assign(ds.n_rows(), false);
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    if (!(sd[i] >= 0)) throw ConfigError("noise sd must be nonnegative");
    const double zx = standard_normal(rng);
    const double zy = standard_normal(rng);
    if (sd[i] == 0) continue;
    const double nx = x[i] + sd[i] * zx;
    const double ny = y[i] + sd[i] * zy;
    x[i] = std::clamp(nx, kRecodedRange.lo, kRecodedRange.hi);
    y[i] = std::clamp(ny, kRecodedRange.lo, kRecodedRange.hi);
    out.clipped[i] = x[i] != nx || y[i] != ny;
  }
  out.data = ds.with_columns({{jx, std::move(x)}, {jy, std::move(y)}});
  return out;
}

Correlogram correlogram(const Dataset& ds, std::span<const double> residuals,
                        std::span<const double> edges, std::size_t min_pairs,
                        bool known_zero_mean) {
  if (edges.size() < 3) throw ConfigError("correlogram needs at least two bins");
  if (!std::is_sorted(edges.begin(), edges.end())) {
    throw ConfigError("correlogram bin edges must be increasing");
  }
  const std::size_t n = ds.n_rows();
  if (residuals.size() != n) throw ConfigError("one residual per record is required");
  double mean = 0;
  if (!known_zero_mean) {
    for (double r : residuals) mean += r;
    mean /= static_cast<double>(n);
  }
  double ss = 0;
  for (double r : residuals) ss += (r - mean) * (r - mean);
  const double var = ss / static_cast<double>(n);
  if (!(var > 0)) throw ConfigError("residuals have zero variance");
  const std::size_t nb = edges.size() - 1;
  std::vector<double> sum(nb, 0.0);
  std::vector<std::size_t> count(nb, 0);
  const auto xs = ds.column(ds.schema().longitude());
  const auto ys = ds.column(ds.schema().latitude());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::hypot(xs[i] - xs[j], ys[i] - ys[j]);
      const auto it = std::upper_bound(edges.begin(), edges.end(), d);
      if (it == edges.begin() || it == edges.end()) continue;
      const auto b = static_cast<std::size_t>(it - edges.begin()) - 1;
      sum[b] += (residuals[i] - mean) * (residuals[j] - mean);
      ++count[b];
    }
  }
  Correlogram out;
  for (std::size_t b = 0; b < nb; ++b) {
    if (count[b] < min_pairs) {
      out.warnings.push_back("bin [" + std::to_string(edges[b]) + ", " +
                             std::to_string(edges[b + 1]) + ") has " +
                             std::to_string(count[b]) + " pairs; dropped");
      continue;
    }
    out.bins.push_back({edges[b], edges[b + 1], count[b],
                        sum[b] / static_cast<double>(count[b]) / var});
  }
  return out;
}

}  // namespace geosynth

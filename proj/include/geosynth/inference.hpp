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

// Combining rules for partially synthetic data and the per-dataset
// estimators they are applied to.
//
// With estimates q_l and variances u_l from m synthetic datasets:
//   q_bar = mean(q_l), u_bar = mean(u_l), b_m = var(q_l),
//   T_m = u_bar + b_m / m,  nu_m = (m - 1) (1 + m u_bar / b_m)^2,
// and intervals q_bar +/- t_{nu_m} sqrt(T_m). When b_m = 0, nu_m is infinite
// and normal quantiles are used.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "geosynth/dataset.hpp"

namespace geosynth {

struct ReplicateEstimate {
  double q = 0;
  double u = 0;
};

struct ConfidenceInterval {
  double lo = 0;
  double hi = 0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

struct MiEstimate {
  std::size_t m = 0;
  double q_bar = 0;
  double u_bar = 0;
  double b_m = 0;
  double T_m = 0;
  // +infinity when b_m == 0.
  double nu_m = 0;

  ConfidenceInterval ci(double level = 0.95) const;
};

// Throws ArityError when fewer than two estimates are given.
MiEstimate combine(std::span<const ReplicateEstimate> estimates);

// Quantile of Student's t with nu degrees of freedom; nu = +infinity gives
// the standard normal quantile.
double student_t_quantile(double p, double nu);

// Rows kept by an estimator; empty optional keeps all rows.
using RowFilter = std::optional<std::vector<bool>>;

// q = sample mean, u = s^2 / n.
ReplicateEstimate estimate_mean(const Dataset& ds, std::string_view variable,
                                const RowFilter& filter = std::nullopt);

// q = share of rows at `level`, u = q (1 - q) / n.
ReplicateEstimate estimate_proportion(const Dataset& ds,
                                      std::string_view variable,
                                      std::string_view level,
                                      const RowFilter& filter = std::nullopt);

// Share of rows with a continuous value above `threshold`.
ReplicateEstimate estimate_proportion_above(
    const Dataset& ds, std::string_view variable, double threshold,
    const RowFilter& filter = std::nullopt);

struct LogisticOptions {
  double tolerance = 1e-8;
  int max_iterations = 50;
};

struct LogisticFit {
  // "(intercept)" first, then one entry per continuous predictor and one
  // "name[level]" indicator per non-reference level of categorical ones.
  std::vector<std::string> names;
  std::vector<ReplicateEstimate> coefficients;
  int iterations = 0;

  Eigen::VectorXd beta() const;
};

// Design matrix used by fit_logistic: intercept column, continuous values,
// and indicators for every categorical level except the first.
Eigen::MatrixXd logistic_design(const Dataset& ds,
                                std::span<const std::string> predictors,
                                std::vector<std::string>* names = nullptr);

// 0/1 outcome vector: level index 1 of a two-level categorical, or a
// continuous column holding only 0 and 1.
Eigen::VectorXd binary_outcome(const Dataset& ds, std::string_view outcome);

// Maximum-likelihood logistic regression by iteratively reweighted least
// squares; u is the squared standard error from the inverse Fisher
// information. Throws ConvergenceError, naming the offending predictor, on
// separation or a singular information matrix.
LogisticFit fit_logistic(const Dataset& ds, std::string_view outcome,
                         std::span<const std::string> predictors,
                         const LogisticOptions& options = {});

// Combines per-coefficient estimates from several fits with identical terms.
std::vector<MiEstimate> combine_logistic(std::span<const LogisticFit> fits);

}  // namespace geosynth

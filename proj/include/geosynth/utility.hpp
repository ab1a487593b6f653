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

// Analytical-validity tools: simulated populations and spatial outcomes,
// comparisons of synthetic-data estimates with the original data, and the
// random-noise baseline for geography.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geosynth/dataset.hpp"
#include "geosynth/geometry.hpp"
#include "geosynth/inference.hpp"
#include "geosynth/random.hpp"

namespace geosynth {

// Zero-mean Gaussian process with covariance
// sigma2 * exp(-phi * distance), plus jitter on the diagonal.
struct GpSpec {
  double sigma2 = 2.0;
  double phi = 0.06;
  // Negative means 1e-8 * sigma2.
  double jitter = -1;

  double effective_jitter() const { return jitter < 0 ? 1e-8 * sigma2 : jitter; }
  // Distance at which the correlation falls to 0.05.
  double effective_range() const;
  void validate() const;
};

// Cholesky factor of the covariance over a fixed set of points, reused for
// every draw.
class GaussianProcess {
 public:
  // Throws NumericalError when the covariance is not numerically positive
  // definite.
  GaussianProcess(std::span<const Point> points, const GpSpec& spec);

  std::size_t size() const { return static_cast<std::size_t>(factor_.rows()); }
  std::vector<double> draw(Rng& rng) const;

 private:
  Eigen::MatrixXd factor_;
};

std::vector<double> simulate_gp(std::span<const Point> points,
                                const GpSpec& spec, Rng& rng);

struct SurrogateOutcomeSpec {
  double intercept = 0.02;
  double coef_sex = 1.0;
  double coef_race = 1.0;
  double coef_age = 0.003;
  GpSpec gp;
  bool spatial = true;
  std::string sex = "sex";
  std::string race = "race";
  std::string age = "age";
  // Level coded 1 in the linear predictor; every other level is 0.
  std::string sex_one = "male";
  std::string race_one = "black";
};

struct SurrogateOutcome {
  // 0/1 draws.
  std::vector<double> y;
  std::vector<double> probability;
  // Spatial effect; all zero for a nonspatial outcome.
  std::vector<double> field;
};

double logistic(double x);

// logit(pi_i) = intercept + b_sex Sex_i + b_race Race_i + b_age Age_i + w(s_i)
// and y_i ~ Bernoulli(pi_i). Throws SchemaError when a column is missing.
SurrogateOutcome generate_surrogate_outcome(const Dataset& ds,
                                            const SurrogateOutcomeSpec& spec,
                                            Rng& rng);

// Copy of `ds` with the outcome appended as a categorical {"0", "1"} column.
Dataset with_outcome(const Dataset& ds, const std::string& name,
                     std::span<const double> y);

struct Cluster {
  double weight = 1;
  Point centre;
  double sd_x = 10;
  double sd_y = 10;
  double rho = 0;
  double p_black = 0.3;
  double p_male = 0.5;
  double age_mean = 70;
  double age_sd = 14;
  double educ_mean = 12;
};

struct PopulationSpec {
  std::vector<Cluster> clusters;
  // Adds a categorical column with a "missing" level in about 5% of rows.
  bool include_autopsy = false;

  // Seven clusters of differing composition.
  static PopulationSpec standard();
};

// Columns: lon, lat (recoded units), sex {female, male}, race {white, black},
// age (16-99 years), educ (0-20 years), marital {married, widowed, divorced,
// never_married, separated}, and optionally autopsy {no, yes, missing}.
// Locations come from the cluster mixture, redrawn until they fall in
// [1, 100]^2. Throws ConfigError when n == 0.
Dataset simulate_population(std::size_t n, const PopulationSpec& spec, Rng& rng);

// Seven rectangles tiling [0, 100]^2: three across the top half and four
// across the bottom half.
RegionMap standard_regions();

struct Estimand {
  enum class Kind { kMean, kPercentAt, kPercentAbove };
  std::string name;
  Kind kind = Kind::kMean;
  std::string variable;
  std::string level;
  double threshold = 0;

  bool is_percentage() const { return kind != Kind::kMean; }
  // Percentages are on the 0-100 scale, with variances scaled to match.
  ReplicateEstimate estimate(const Dataset& ds, const RowFilter& filter) const;
};

std::vector<Estimand> standard_estimands();

struct DescriptiveRow {
  std::string estimand;
  std::string region;
  bool percentage = false;
  double Q = 0;
  double median = 0;
  double mse = 0;
  std::size_t reps_used = 0;
  // Reps with no records in the region in some dataset; excluded from MSE.
  std::size_t reps_flagged = 0;
};

// Region of each record of `ds` by its (possibly synthetic) location.
std::vector<std::string> regions_of(const Dataset& ds, const RegionMap& regions);

// For each estimand and region: Q on `original`, the point estimate of each
// rep (q_bar over its datasets, or q for a single dataset), and the median
// and mean squared error of those estimates around Q.
std::vector<DescriptiveRow> descriptive_comparison(
    const Dataset& original, const std::vector<std::vector<Dataset>>& reps,
    const RegionMap& regions, const std::vector<Estimand>& estimands);

// Rows with mse > limit among percentage estimands.
std::size_t count_mse_above(std::span<const DescriptiveRow> rows, double limit);

struct RegressionRow {
  std::string term;
  double q = 0;
  double se = 0;
  double q_bar = 0;
  double sqrt_T = 0;
};

std::vector<RegressionRow> regression_comparison(
    const Dataset& original, std::span<const Dataset> synthetic,
    const std::string& outcome, std::span<const std::string> predictors);

// Share of `rows` (all when empty) whose prediction 1{logistic(x'beta) >
// threshold} differs from the outcome.
double misclassification(const Eigen::VectorXd& beta, const Dataset& ds,
                         const std::string& outcome,
                         std::span<const std::string> predictors,
                         std::span<const std::size_t> rows = {},
                         double threshold = 0.5);

struct TrainTestSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Random split holding out round(test_fraction * n) rows.
TrainTestSplit train_test_split(std::size_t n, double test_fraction, Rng& rng);

struct NoisyGeography {
  Dataset data;
  // Records whose perturbed location was clipped to [1, 100]^2.
  std::vector<bool> clipped;
};

// s*_i ~ N(s_i, sd_i^2 I), clipped to the recoded domain.
NoisyGeography add_geographic_noise(const Dataset& ds, std::span<const double> sd,
                                    Rng& rng);

struct CorrelogramBin {
  double lo = 0;
  double hi = 0;
  std::size_t pairs = 0;
  double correlation = 0;
};

struct Correlogram {
  std::vector<CorrelogramBin> bins;
  std::vector<std::string> warnings;
};

// Mean product of standardized residuals over pairs whose distance falls in
// [edges[k], edges[k+1]). With known_zero_mean the residuals are scaled but
// not centred. Bins with fewer than min_pairs pairs are dropped with a
// warning. Throws ConfigError for fewer than two bins.
Correlogram correlogram(const Dataset& ds, std::span<const double> residuals,
                        std::span<const double> edges,
                        std::size_t min_pairs = 30,
                        bool known_zero_mean = false);

}  // namespace geosynth

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
#include <sstream>

#include "geosynth/errors.hpp"
#include "geosynth/kernels.hpp"
#include "geosynth/utility.hpp"

namespace geosynth {

double GpSpec::effective_range() const { return -std::log(0.05) / phi; }

void GpSpec::validate() const {
  if (!(sigma2 > 0) || !std::isfinite(sigma2)) throw ConfigError("GP variance must be positive");
  if (!(phi > 0) || !std::isfinite(phi)) throw ConfigError("GP decay must be positive");
  if (!(effective_jitter() >= 0)) throw ConfigError("GP jitter must be nonnegative");
}

GaussianProcess::GaussianProcess(std::span<const Point> points, const GpSpec& spec) {
  spec.validate();
  const std::size_t n = points.size();
  std::vector<double> xs(n), ys(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(points[k].x) || !std::isfinite(points[k].y)) {
      throw ConfigError("GP points must be finite");
    }
    xs[k] = points[k].x;
    ys[k] = points[k].y;
  }
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd cov(N, N);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    kernels::exp_cov_row(xs, ys, xs[i], ys[i], spec.sigma2, spec.phi, row);
    for (std::size_t j = 0; j < n; ++j) {
      cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = row[j];
    }
  }
  cov.diagonal().array() += spec.effective_jitter();
  const double scale = n > 0 ? cov.diagonal().maxCoeff() : 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  bool ok = llt.info() == Eigen::Success;
  if (ok && n > 0) {
    const double pivot = llt.matrixLLT().diagonal().minCoeff();
    ok = pivot * pivot > 1e-14 * scale;
  }
  if (!ok) {
    std::ostringstream msg;
    msg << "GP covariance is not positive definite with jitter "
        << spec.effective_jitter() << "; increase the jitter";
    throw NumericalError(msg.str());
  }
  factor_ = llt.matrixL();
}

std::vector<double> GaussianProcess::draw(Rng& rng) const {
  const Eigen::Index n = factor_.rows();
  Eigen::VectorXd z(n);
  for (Eigen::Index k = 0; k < n; ++k) z[k] = standard_normal(rng);
  const Eigen::VectorXd w = factor_.triangularView<Eigen::Lower>() * z;
  return std::vector<double>(w.data(), w.data() + n);
}

std::vector<double> simulate_gp(std::span<const Point> points, const GpSpec& spec,
                                Rng& rng) {
  return GaussianProcess(points, spec).draw(rng);
}

double logistic(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

SurrogateOutcome generate_surrogate_outcome(const Dataset& ds,
                                            const SurrogateOutcomeSpec& spec,
                                            Rng& rng) {
  const Schema& schema = ds.schema();
  for (const std::string* name : {&spec.sex, &spec.race, &spec.age}) {
    if (!schema.find(*name)) throw SchemaError("outcome needs column '" + *name + "'");
  }
  auto indicator = [&](const std::string& name, const std::string& one) {
    const std::size_t j = schema.index_of(name);
    const VariableSpec& v = schema[j];
    std::vector<double> out(ds.n_rows());
    if (!v.is_categorical()) {
      for (std::size_t i = 0; i < ds.n_rows(); ++i) out[i] = ds.value(i, j);
      return out;
    }
    const auto it = std::find(v.levels.begin(), v.levels.end(), one);
    if (it == v.levels.end()) {
      throw SchemaError("column '" + name + "' has no level '" + one + "'");
    }
    const auto code = static_cast<double>(it - v.levels.begin());
    for (std::size_t i = 0; i < ds.n_rows(); ++i) out[i] = ds.value(i, j) == code;
    return out;
  };
  const std::vector<double> sex = indicator(spec.sex, spec.sex_one);
  const std::vector<double> race = indicator(spec.race, spec.race_one);
  const auto age = ds.column(spec.age);
  SurrogateOutcome out;
  out.field.assign(ds.n_rows(), 0.0);
  if (spec.spatial) {
    std::vector<Point> pts(ds.n_rows());
    for (std::size_t i = 0; i < ds.n_rows(); ++i) pts[i] = record_location(ds, i);
    out.field = simulate_gp(pts, spec.gp, rng);
  }
  out.y.resize(ds.n_rows());
  out.probability.resize(ds.n_rows());
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    const double eta = spec.intercept + spec.coef_sex * sex[i] + spec.coef_race * race[i] +
                       spec.coef_age * age[i] + out.field[i];
    out.probability[i] = logistic(eta);
    out.y[i] = uniform_open(rng) < out.probability[i] ? 1.0 : 0.0;
  }
  return out;
}

Dataset with_outcome(const Dataset& ds, const std::string& name,
                     std::span<const double> y) {
  VariableSpec v{name, VariableKind::kCategorical, {"0", "1"}, VariableRole::kOutcome};
  return ds.with_added_column(std::move(v), std::vector<double>(y.begin(), y.end()));
}

}  // namespace geosynth

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

#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "geosynth/errors.hpp"
#include "geosynth/random.hpp"

namespace geosynth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_filter(const Dataset& ds, const RowFilter& filter) {
  if (filter && filter->size() != ds.n_rows()) {
    throw ConfigError("row filter length " + std::to_string(filter->size()) +
                      " does not match " + std::to_string(ds.n_rows()) + " rows");
  }
}

bool keep(const RowFilter& filter, std::size_t i) {
  return !filter || (*filter)[i];
}

ReplicateEstimate proportion_of(const Dataset& ds, std::size_t col,
                                const RowFilter& filter, auto&& hit) {
  check_filter(ds, filter);
  std::size_t n = 0, k = 0;
  const auto v = ds.column(col);
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    if (!keep(filter, i)) continue;
    ++n;
    k += hit(v[i]) ? 1 : 0;
  }
  if (n == 0) {
    throw EmptyCellError("no rows selected for a proportion of '" +
                         ds.schema()[col].name + "'");
  }
  const double p = static_cast<double>(k) / static_cast<double>(n);
  return {p, p * (1 - p) / static_cast<double>(n)};
}

// Non-intercept term with the largest scale-adjusted magnitude in `v`.
std::size_t blame_term(const Eigen::MatrixXd& x, const Eigen::VectorXd& v) {
  if (x.cols() == 1) return 0;
  std::size_t best = 1;
  double best_score = -1;
  for (Eigen::Index k = 1; k < x.cols(); ++k) {
    const double mean = x.col(k).mean();
    const double sd = std::sqrt((x.col(k).array() - mean).square().mean());
    const double score = std::abs(v[k]) * sd;
    if (score > best_score) {
      best_score = score;
      best = static_cast<std::size_t>(k);
    }
  }
  return best;
}

}  // namespace

MiEstimate combine(std::span<const ReplicateEstimate> estimates) {
  const std::size_t m = estimates.size();
  if (m < 2) {
    throw ArityError("combining rules need at least 2 estimates, got " +
                     std::to_string(m));
  }
  // Welford accumulation of q; plain mean of u.
  double mean = 0, m2 = 0, u_sum = 0;
  for (std::size_t l = 0; l < m; ++l) {
    const ReplicateEstimate& e = estimates[l];
    if (!std::isfinite(e.q) || !std::isfinite(e.u) || e.u < 0) {
      throw ConfigError("replicate estimate " + std::to_string(l) +
                        " must have finite q and finite u >= 0");
    }
    const double d = e.q - mean;
    mean += d / static_cast<double>(l + 1);
    m2 += d * (e.q - mean);
    u_sum += e.u;
  }
  MiEstimate r;
  r.m = m;
  r.q_bar = mean;
  r.u_bar = u_sum / static_cast<double>(m);
  r.b_m = m2 / static_cast<double>(m - 1);
  r.T_m = r.u_bar + r.b_m / static_cast<double>(m);
  if (r.b_m > 0) {
    const double f = 1 + static_cast<double>(m) * r.u_bar / r.b_m;
    r.nu_m = static_cast<double>(m - 1) * f * f;
  } else {
    r.nu_m = kInf;
  }
  return r;
}

ConfidenceInterval MiEstimate::ci(double level) const {
  if (!(level > 0 && level < 1)) throw ConfigError("confidence level must be in (0, 1)");
  const double half = student_t_quantile((1 + level) / 2, nu_m) * std::sqrt(T_m);
  return {q_bar - half, q_bar + half};
}

double student_t_quantile(double p, double nu) {
  if (!(p > 0 && p < 1)) throw ConfigError("quantile probability must be in (0, 1)");
  if (!(nu > 0)) throw ConfigError("degrees of freedom must be positive");
  if (std::isinf(nu)) return normal_quantile(p);
  return boost::math::quantile(boost::math::students_t_distribution<double>(nu), p);
}

ReplicateEstimate estimate_mean(const Dataset& ds, std::string_view variable,
                                const RowFilter& filter) {
  const std::size_t col = ds.schema().index_of(variable);
  if (ds.schema()[col].is_categorical()) {
    throw ConfigError("mean of categorical variable '" + std::string(variable) + "'");
  }
  check_filter(ds, filter);
  const auto v = ds.column(col);
  std::size_t n = 0;
  double sum = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (keep(filter, i)) {
      ++n;
      sum += v[i];
    }
  }
  if (n < 2) {
    throw EmptyCellError("mean of '" + std::string(variable) + "' needs at least 2 rows, got " +
                         std::to_string(n));
  }
  const double mean = sum / static_cast<double>(n);
  double ss = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (keep(filter, i)) ss += (v[i] - mean) * (v[i] - mean);
  }
  const double s2 = ss / static_cast<double>(n - 1);
  return {mean, s2 / static_cast<double>(n)};
}

ReplicateEstimate estimate_proportion(const Dataset& ds,
                                      std::string_view variable,
                                      std::string_view level,
                                      const RowFilter& filter) {
  const std::size_t col = ds.schema().index_of(variable);
  const VariableSpec& spec = ds.schema()[col];
  if (!spec.is_categorical()) {
    throw ConfigError("proportion of continuous variable '" + spec.name +
                      "' needs a threshold");
  }
  const auto code = spec.level_index(level);
  if (!code) {
    throw SchemaError("'" + std::string(level) + "' is not a level of '" + spec.name + "'");
  }
  const double target = *code;
  return proportion_of(ds, col, filter, [&](double v) { return v == target; });
}

ReplicateEstimate estimate_proportion_above(const Dataset& ds,
                                            std::string_view variable,
                                            double threshold,
                                            const RowFilter& filter) {
  const std::size_t col = ds.schema().index_of(variable);
  if (ds.schema()[col].is_categorical()) {
    throw ConfigError("threshold proportion of categorical variable '" +
                      std::string(variable) + "'");
  }
  return proportion_of(ds, col, filter, [&](double v) { return v > threshold; });
}

Eigen::VectorXd LogisticFit::beta() const {
  Eigen::VectorXd b(static_cast<Eigen::Index>(coefficients.size()));
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    b[static_cast<Eigen::Index>(k)] = coefficients[k].q;
  }
  return b;
}

Eigen::MatrixXd logistic_design(const Dataset& ds,
                                std::span<const std::string> predictors,
                                std::vector<std::string>* names) {
  std::vector<std::string> terms{"(intercept)"};
  std::vector<std::pair<std::size_t, int>> cols;  // (column, level or -1)
  for (const auto& p : predictors) {
    const std::size_t j = ds.schema().index_of(p);
    const VariableSpec& v = ds.schema()[j];
    if (v.is_categorical()) {
      for (std::size_t k = 1; k < v.levels.size(); ++k) {
        terms.push_back(v.name + "[" + v.levels[k] + "]");
        cols.emplace_back(j, static_cast<int>(k));
      }
    } else {
      terms.push_back(v.name);
      cols.emplace_back(j, -1);
    }
  }
  const auto n = static_cast<Eigen::Index>(ds.n_rows());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(terms.size()));
  x.col(0).setOnes();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto v = ds.column(cols[c].first);
    const int level = cols[c].second;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double val = v[static_cast<std::size_t>(i)];
      x(i, static_cast<Eigen::Index>(c + 1)) = level < 0 ? val : (val == level ? 1.0 : 0.0);
    }
  }
  if (names) *names = std::move(terms);
  return x;
}

Eigen::VectorXd binary_outcome(const Dataset& ds, std::string_view outcome) {
  const std::size_t j = ds.schema().index_of(outcome);
  const VariableSpec& v = ds.schema()[j];
  if (v.is_categorical() && v.levels.size() != 2) {
    throw ConfigError("outcome '" + v.name + "' must have exactly 2 levels");
  }
  const auto col = ds.column(j);
  Eigen::VectorXd y(static_cast<Eigen::Index>(col.size()));
  for (std::size_t i = 0; i < col.size(); ++i) {
    if (col[i] != 0 && col[i] != 1) {
      throw ConfigError("outcome '" + v.name + "' is not binary at row " + std::to_string(i));
    }
    y[static_cast<Eigen::Index>(i)] = col[i];
  }
  return y;
}

LogisticFit fit_logistic(const Dataset& ds, std::string_view outcome,
                         std::span<const std::string> predictors,
                         const LogisticOptions& options) {
  LogisticFit fit;
  const Eigen::MatrixXd x = logistic_design(ds, predictors, &fit.names);
  const Eigen::VectorXd y = binary_outcome(ds, outcome);
  const Eigen::Index p = x.cols();
  if (x.rows() < p) throw ConvergenceError("fewer rows than model terms");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < p) {
    const auto bad = qr.colsPermutation().indices()[qr.rank()];
    const std::string& term = fit.names[static_cast<std::size_t>(bad)];
    throw ConvergenceError("design matrix is rank deficient at term '" + term + "'", term);
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd delta(p);
  Eigen::MatrixXd h(p, p);
  bool converged = false;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Eigen::VectorXd eta = x * beta;
    const Eigen::VectorXd mu = eta.unaryExpr([](double e) { return 1 / (1 + std::exp(-e)); });
    const Eigen::VectorXd w = mu.array() * (1 - mu.array());
    h.noalias() = x.transpose() * w.asDiagonal() * x;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-13) {
      const std::string& term = fit.names[blame_term(x, beta)];
      throw ConvergenceError(
          "Fisher information became singular (separation) at term '" + term + "'", term);
    }
    delta = ldlt.solve(x.transpose() * (y - mu));
    beta += delta;
    fit.iterations = it;
    if (!beta.allFinite()) break;
    if (delta.cwiseAbs().maxCoeff() < options.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    const std::string& term = fit.names[blame_term(x, beta)];
    throw ConvergenceError("logistic fit did not converge in " +
                               std::to_string(options.max_iterations) +
                               " iterations; term '" + term + "' diverges",
                           term);
  }
  const Eigen::VectorXd eta = x * beta;
  const Eigen::VectorXd mu = eta.unaryExpr([](double e) { return 1 / (1 + std::exp(-e)); });
  const Eigen::VectorXd w = mu.array() * (1 - mu.array());
  h.noalias() = x.transpose() * w.asDiagonal() * x;
  const Eigen::MatrixXd cov = h.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  for (Eigen::Index k = 0; k < p; ++k) fit.coefficients.push_back({beta[k], cov(k, k)});
  return fit;
}

std::vector<MiEstimate> combine_logistic(std::span<const LogisticFit> fits) {
  if (fits.size() < 2) throw ArityError("combining rules need at least 2 fits");
  std::vector<MiEstimate> out;
  for (std::size_t k = 0; k < fits.front().coefficients.size(); ++k) {
    std::vector<ReplicateEstimate> es;
    for (const auto& f : fits) {
      if (f.names != fits.front().names) throw ConfigError("fits have different terms");
      es.push_back(f.coefficients[k]);
    }
    out.push_back(combine(es));
  }
  return out;
}

}  // namespace geosynth

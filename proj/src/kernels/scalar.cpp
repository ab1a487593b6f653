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

#include <cassert>
#include <cmath>

#include "geosynth/kernels.hpp"

namespace geosynth::kernels::scalar {

double weighted_gauss_sum(std::span<const double> atoms,
                          std::span<const double> weights, double y,
                          double neg_inv_2h2) {
  assert(atoms.size() == weights.size());
  double acc = 0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const double d = y - atoms[k];
    acc += weights[k] * std::exp(neg_inv_2h2 * (d * d));
  }
  return acc;
}

double weighted_sq_dist(std::span<const double> xs, std::span<const double> ys,
                        std::span<const double> w, double cx, double cy) {
  double acc = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double dx = xs[k] - cx;
    const double dy = ys[k] - cy;
    acc += w[k] * (dx * dx + dy * dy);
  }
  return acc;
}

std::size_t count_within(std::span<const double> xs,
                         std::span<const double> ys, double cx, double cy,
                         double r2) {
  std::size_t n = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double dx = xs[k] - cx;
    const double dy = ys[k] - cy;
    const double dx2 = dx * dx;
    const double dy2 = dy * dy;
    n += (dx2 + dy2 <= r2) ? 1 : 0;
  }
  return n;
}

void sq_dist(std::span<const double> xs, std::span<const double> ys, double cx,
             double cy, std::span<double> out) {
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double dx = xs[k] - cx;
    const double dy = ys[k] - cy;
    const double dx2 = dx * dx;
    const double dy2 = dy * dy;
    out[k] = dx2 + dy2;
  }
}

void exp_cov_row(std::span<const double> xs, std::span<const double> ys,
                 double px, double py, double sigma2, double phi,
                 std::span<double> out) {
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double dx = xs[k] - px;
    const double dy = ys[k] - py;
    out[k] = sigma2 * std::exp(-phi * std::sqrt(dx * dx + dy * dy));
  }
}

double centered_sum_sq(std::span<const double> v, double center) {
  double acc = 0;
  for (double x : v) {
    const double d = x - center;
    acc += d * d;
  }
  return acc;
}

}  // namespace geosynth::kernels::scalar

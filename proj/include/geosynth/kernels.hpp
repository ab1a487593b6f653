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

// Data-parallel inner loops used by the risk, utility and matching code.
//
// Every kernel has a scalar reference implementation in `kernels::scalar`
// and, on x86-64, an AVX2 variant in `kernels::avx2`. The unqualified entry
// points dispatch to the best variant the CPU supports; the choice is made
// once and can be pinned with `set_isa()` or the GEOSYNTH_ISA environment
// variable ("scalar" or "avx2"). Variants agree to within a few ulps on the
// floating-point reductions and exactly on the counting kernels.

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace geosynth::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view to_string(Isa isa);

// True when the AVX2 variants were compiled in and the CPU supports them.
bool avx2_available();

Isa active_isa();
// Pins the dispatch target. Requesting kAvx2 on a machine without it is a
// no-op that keeps the scalar path.
void set_isa(Isa isa);

// sum_k w[k] * exp(neg_inv_2h2 * (y - atoms[k])^2)
double weighted_gauss_sum(std::span<const double> atoms,
                          std::span<const double> weights, double y,
                          double neg_inv_2h2);

// sum_k w[k] * ((xs[k] - cx)^2 + (ys[k] - cy)^2)
double weighted_sq_dist(std::span<const double> xs, std::span<const double> ys,
                        std::span<const double> w, double cx, double cy);

// #{k : (xs[k] - cx)^2 + (ys[k] - cy)^2 <= r2}
std::size_t count_within(std::span<const double> xs,
                         std::span<const double> ys, double cx, double cy,
                         double r2);

// out[k] = (xs[k] - cx)^2 + (ys[k] - cy)^2
void sq_dist(std::span<const double> xs, std::span<const double> ys, double cx,
             double cy, std::span<double> out);

// out[k] = sigma2 * exp(-phi * ||(xs[k], ys[k]) - (px, py)||)
void exp_cov_row(std::span<const double> xs, std::span<const double> ys,
                 double px, double py, double sigma2, double phi,
                 std::span<double> out);

// sum_k (v[k] - center)^2
double centered_sum_sq(std::span<const double> v, double center);

namespace scalar {
double weighted_gauss_sum(std::span<const double> atoms,
                          std::span<const double> weights, double y,
                          double neg_inv_2h2);
double weighted_sq_dist(std::span<const double> xs, std::span<const double> ys,
                        std::span<const double> w, double cx, double cy);
std::size_t count_within(std::span<const double> xs,
                         std::span<const double> ys, double cx, double cy,
                         double r2);
void sq_dist(std::span<const double> xs, std::span<const double> ys, double cx,
             double cy, std::span<double> out);
void exp_cov_row(std::span<const double> xs, std::span<const double> ys,
                 double px, double py, double sigma2, double phi,
                 std::span<double> out);
double centered_sum_sq(std::span<const double> v, double center);
}  // namespace scalar

#if defined(GEOSYNTH_HAVE_AVX2)
namespace avx2 {
double weighted_gauss_sum(std::span<const double> atoms,
                          std::span<const double> weights, double y,
                          double neg_inv_2h2);
double weighted_sq_dist(std::span<const double> xs, std::span<const double> ys,
                        std::span<const double> w, double cx, double cy);
std::size_t count_within(std::span<const double> xs,
                         std::span<const double> ys, double cx, double cy,
                         double r2);
void sq_dist(std::span<const double> xs, std::span<const double> ys, double cx,
             double cy, std::span<double> out);
void exp_cov_row(std::span<const double> xs, std::span<const double> ys,
                 double px, double py, double sigma2, double phi,
                 std::span<double> out);
double centered_sum_sq(std::span<const double> v, double center);
// Vector exp used by the kernels above, exposed for testing: out[k] =
// exp(x[k]).
void exp_array(std::span<const double> x, std::span<double> out);
}  // namespace avx2
#endif

}  // namespace geosynth::kernels

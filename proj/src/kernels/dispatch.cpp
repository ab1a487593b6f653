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

#include <atomic>
#include <cstdlib>
#include <string>

#include "geosynth/kernels.hpp"

namespace geosynth::kernels {
namespace {

struct Table {
  double (*weighted_gauss_sum)(std::span<const double>, std::span<const double>,
                               double, double);
  double (*weighted_sq_dist)(std::span<const double>, std::span<const double>,
                             std::span<const double>, double, double);
  std::size_t (*count_within)(std::span<const double>, std::span<const double>,
                              double, double, double);
  void (*sq_dist)(std::span<const double>, std::span<const double>, double,
                  double, std::span<double>);
  void (*exp_cov_row)(std::span<const double>, std::span<const double>, double,
                      double, double, double, std::span<double>);
  double (*centered_sum_sq)(std::span<const double>, double);
};

constexpr Table kScalarTable{
    scalar::weighted_gauss_sum, scalar::weighted_sq_dist, scalar::count_within,
    scalar::sq_dist,            scalar::exp_cov_row,      scalar::centered_sum_sq,
};

#if defined(GEOSYNTH_HAVE_AVX2)
constexpr Table kAvx2Table{
    avx2::weighted_gauss_sum, avx2::weighted_sq_dist, avx2::count_within,
    avx2::sq_dist,            avx2::exp_cov_row,      avx2::centered_sum_sq,
};
#endif

bool cpu_has_avx2() {
#if defined(GEOSYNTH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa initial_isa() {
  const bool has = cpu_has_avx2();
  if (const char* env = std::getenv("GEOSYNTH_ISA")) {
    const std::string v(env);
    if (v == "scalar") return Isa::kScalar;
    if (v == "avx2" && has) return Isa::kAvx2;
  }
  return has ? Isa::kAvx2 : Isa::kScalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

const Table& table() {
#if defined(GEOSYNTH_HAVE_AVX2)
  if (current().load(std::memory_order_relaxed) == Isa::kAvx2) {
    return kAvx2Table;
  }
#endif
  return kScalarTable;
}

}  // namespace

std::string_view to_string(Isa isa) {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

bool avx2_available() {
  static const bool has = cpu_has_avx2();
  return has;
}

Isa active_isa() { return current().load(); }

void set_isa(Isa isa) {
  if (isa == Isa::kAvx2 && !avx2_available()) isa = Isa::kScalar;
  current().store(isa);
}

double weighted_gauss_sum(std::span<const double> atoms,
                          std::span<const double> weights, double y,
                          double neg_inv_2h2) {
  return table().weighted_gauss_sum(atoms, weights, y, neg_inv_2h2);
}

double weighted_sq_dist(std::span<const double> xs, std::span<const double> ys,
                        std::span<const double> w, double cx, double cy) {
  return table().weighted_sq_dist(xs, ys, w, cx, cy);
}

std::size_t count_within(std::span<const double> xs,
                         std::span<const double> ys, double cx, double cy,
                         double r2) {
  return table().count_within(xs, ys, cx, cy, r2);
}

void sq_dist(std::span<const double> xs, std::span<const double> ys, double cx,
             double cy, std::span<double> out) {
  table().sq_dist(xs, ys, cx, cy, out);
}

void exp_cov_row(std::span<const double> xs, std::span<const double> ys,
                 double px, double py, double sigma2, double phi,
                 std::span<double> out) {
  table().exp_cov_row(xs, ys, px, py, sigma2, phi, out);
}

double centered_sum_sq(std::span<const double> v, double center) {
  return table().centered_sum_sq(v, center);
}

}  // namespace geosynth::kernels

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

// AVX2 variants. This translation unit is built with -mavx2 and
// -ffp-contract=off; distance terms are formed with separate multiplies and
// adds so that the counting kernels agree bit-for-bit with the scalar path.

#include <immintrin.h>

#include <cmath>

#include "geosynth/kernels.hpp"

namespace geosynth::kernels::avx2 {
namespace {

constexpr std::size_t kLanes = 4;

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// exp(x) for x in [-708.39, 709]: Cody-Waite reduction by ln 2 followed by
// the Cephes rational approximation on [-ln2/2, ln2/2]. Inputs below the
// lower bound flush to zero.
inline __m256d exp_pd(__m256d x) {
  const __m256d kHi = _mm256_set1_pd(709.0);
  const __m256d kLo = _mm256_set1_pd(-708.39);
  const __m256d kLog2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d kC1 = _mm256_set1_pd(6.93145751953125E-1);
  const __m256d kC2 = _mm256_set1_pd(1.42860682030941723212E-6);
  const __m256d kP0 = _mm256_set1_pd(1.26177193074810590878E-4);
  const __m256d kP1 = _mm256_set1_pd(3.02994407707441961300E-2);
  const __m256d kP2 = _mm256_set1_pd(9.99999999999999999910E-1);
  const __m256d kQ0 = _mm256_set1_pd(3.00198505138664455042E-6);
  const __m256d kQ1 = _mm256_set1_pd(2.52448340349684104192E-3);
  const __m256d kQ2 = _mm256_set1_pd(2.27265548208155028766E-1);
  const __m256d kQ3 = _mm256_set1_pd(2.00000000000000000009E0);
  const __m256d kOne = _mm256_set1_pd(1.0);
  const __m256d kTwo = _mm256_set1_pd(2.0);

  const __m256d under = _mm256_cmp_pd(x, kLo, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, kLo), kHi);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, kLog2e),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_sub_pd(x, _mm256_mul_pd(n, kC1));
  r = _mm256_sub_pd(r, _mm256_mul_pd(n, kC2));
  const __m256d rr = _mm256_mul_pd(r, r);

  __m256d px = _mm256_add_pd(_mm256_mul_pd(kP0, rr), kP1);
  px = _mm256_add_pd(_mm256_mul_pd(px, rr), kP2);
  px = _mm256_mul_pd(px, r);
  __m256d qx = _mm256_add_pd(_mm256_mul_pd(kQ0, rr), kQ1);
  qx = _mm256_add_pd(_mm256_mul_pd(qx, rr), kQ2);
  qx = _mm256_add_pd(_mm256_mul_pd(qx, rr), kQ3);
  __m256d e = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  e = _mm256_add_pd(kOne, _mm256_mul_pd(kTwo, e));

  __m256i bits = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(n));
  bits = _mm256_add_epi64(bits, _mm256_set1_epi64x(1023));
  bits = _mm256_slli_epi64(bits, 52);
  e = _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(under, e);
}

inline __m256d sq_dist_pd(__m256d x, __m256d y, __m256d cx, __m256d cy) {
  const __m256d dx = _mm256_sub_pd(x, cx);
  const __m256d dy = _mm256_sub_pd(y, cy);
  return _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
}

}  // namespace

void exp_array(std::span<const double> x, std::span<double> out) {
  std::size_t k = 0;
  for (; k + kLanes <= x.size(); k += kLanes) {
    _mm256_storeu_pd(out.data() + k, exp_pd(_mm256_loadu_pd(x.data() + k)));
  }
  for (; k < x.size(); ++k) out[k] = std::exp(x[k]);
}

double weighted_gauss_sum(std::span<const double> atoms,
                          std::span<const double> weights, double y,
                          double neg_inv_2h2) {
  const __m256d vy = _mm256_set1_pd(y);
  const __m256d vc = _mm256_set1_pd(neg_inv_2h2);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + kLanes <= atoms.size(); k += kLanes) {
    const __m256d d = _mm256_sub_pd(vy, _mm256_loadu_pd(atoms.data() + k));
    const __m256d g = exp_pd(_mm256_mul_pd(vc, _mm256_mul_pd(d, d)));
    acc = _mm256_add_pd(acc,
                        _mm256_mul_pd(_mm256_loadu_pd(weights.data() + k), g));
  }
  double s = hsum(acc);
  for (; k < atoms.size(); ++k) {
    const double d = y - atoms[k];
    s += weights[k] * std::exp(neg_inv_2h2 * (d * d));
  }
  return s;
}

double weighted_sq_dist(std::span<const double> xs, std::span<const double> ys,
                        std::span<const double> w, double cx, double cy) {
  const __m256d vx = _mm256_set1_pd(cx);
  const __m256d vy = _mm256_set1_pd(cy);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + kLanes <= xs.size(); k += kLanes) {
    const __m256d d2 = sq_dist_pd(_mm256_loadu_pd(xs.data() + k),
                                  _mm256_loadu_pd(ys.data() + k), vx, vy);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w.data() + k), d2));
  }
  double s = hsum(acc);
  for (; k < xs.size(); ++k) {
    const double dx = xs[k] - cx;
    const double dy = ys[k] - cy;
    s += w[k] * (dx * dx + dy * dy);
  }
  return s;
}

std::size_t count_within(std::span<const double> xs,
                         std::span<const double> ys, double cx, double cy,
                         double r2) {
  const __m256d vx = _mm256_set1_pd(cx);
  const __m256d vy = _mm256_set1_pd(cy);
  const __m256d vr = _mm256_set1_pd(r2);
  std::size_t n = 0;
  std::size_t k = 0;
  for (; k + kLanes <= xs.size(); k += kLanes) {
    const __m256d d2 = sq_dist_pd(_mm256_loadu_pd(xs.data() + k),
                                  _mm256_loadu_pd(ys.data() + k), vx, vy);
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(d2, vr, _CMP_LE_OQ));
    n += static_cast<std::size_t>(__builtin_popcount(mask));
  }
  for (; k < xs.size(); ++k) {
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
  const __m256d vx = _mm256_set1_pd(cx);
  const __m256d vy = _mm256_set1_pd(cy);
  std::size_t k = 0;
  for (; k + kLanes <= xs.size(); k += kLanes) {
    _mm256_storeu_pd(out.data() + k,
                     sq_dist_pd(_mm256_loadu_pd(xs.data() + k),
                                _mm256_loadu_pd(ys.data() + k), vx, vy));
  }
  for (; k < xs.size(); ++k) {
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
  const __m256d vx = _mm256_set1_pd(px);
  const __m256d vy = _mm256_set1_pd(py);
  const __m256d vs = _mm256_set1_pd(sigma2);
  const __m256d vphi = _mm256_set1_pd(-phi);
  std::size_t k = 0;
  for (; k + kLanes <= xs.size(); k += kLanes) {
    const __m256d d = _mm256_sqrt_pd(sq_dist_pd(
        _mm256_loadu_pd(xs.data() + k), _mm256_loadu_pd(ys.data() + k), vx, vy));
    _mm256_storeu_pd(out.data() + k,
                     _mm256_mul_pd(vs, exp_pd(_mm256_mul_pd(vphi, d))));
  }
  for (; k < xs.size(); ++k) {
    const double dx = xs[k] - px;
    const double dy = ys[k] - py;
    out[k] = sigma2 * std::exp(-phi * std::sqrt(dx * dx + dy * dy));
  }
}

double centered_sum_sq(std::span<const double> v, double center) {
  const __m256d vc = _mm256_set1_pd(center);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + kLanes <= v.size(); k += kLanes) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(v.data() + k), vc);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double s = hsum(acc);
  for (; k < v.size(); ++k) {
    const double d = v[k] - center;
    s += d * d;
  }
  return s;
}

}  // namespace geosynth::kernels::avx2

// Copyright 2026 The ArtiFree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Compiled with -mavx2 -mfma. Nothing here may run unless
// cpu_supports_avx2() returned true.

#include <immintrin.h>

#include <algorithm>

#include "artifree/simd/kernels.hpp"

namespace artifree::simd {
namespace {

inline double HorizontalSum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  s = _mm_add_sd(s, _mm_unpackhi_pd(s, s));
  return _mm_cvtsd_f64(s);
}

inline __m256d LoadF32AsF64(const float* p) {
  return _mm256_cvtps_pd(_mm_loadu_ps(p));
}

double DotAvx2(const float* a, const float* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(LoadF32AsF64(a + i), LoadF32AsF64(b + i), acc0);
    acc1 = _mm256_fmadd_pd(LoadF32AsF64(a + i + 4), LoadF32AsF64(b + i + 4),
                           acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(LoadF32AsF64(a + i), LoadF32AsF64(b + i), acc0);
  double s = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

double SumAvx2(const float* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, LoadF32AsF64(a + i));
    acc1 = _mm256_add_pd(acc1, LoadF32AsF64(a + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, LoadF32AsF64(a + i));
  double s = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i];
  return s;
}

double CenteredDotAvx2(const float* a, double ma, const float* b, double mb,
                       std::size_t n) {
  const __m256d vma = _mm256_set1_pd(ma);
  const __m256d vmb = _mm256_set1_pd(mb);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d a0 = _mm256_sub_pd(LoadF32AsF64(a + i), vma);
    __m256d b0 = _mm256_sub_pd(LoadF32AsF64(b + i), vmb);
    __m256d a1 = _mm256_sub_pd(LoadF32AsF64(a + i + 4), vma);
    __m256d b1 = _mm256_sub_pd(LoadF32AsF64(b + i + 4), vmb);
    acc0 = _mm256_fmadd_pd(a0, b0, acc0);
    acc1 = _mm256_fmadd_pd(a1, b1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d a0 = _mm256_sub_pd(LoadF32AsF64(a + i), vma);
    __m256d b0 = _mm256_sub_pd(LoadF32AsF64(b + i), vmb);
    acc0 = _mm256_fmadd_pd(a0, b0, acc0);
  }
  double s = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += (a[i] - ma) * (b[i] - mb);
  return s;
}

void AccumulateAvx2(double* acc, const float* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_add_pd(_mm256_loadu_pd(acc + i), LoadF32AsF64(x + i));
    _mm256_storeu_pd(acc + i, v);
  }
  for (; i < n; ++i) acc[i] += x[i];
}

void AccumulateSqDevAvx2(double* acc, const float* x, const double* mean,
                         std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(LoadF32AsF64(x + i), _mm256_loadu_pd(mean + i));
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(d, d, _mm256_loadu_pd(acc + i)));
  }
  for (; i < n; ++i) {
    double d = x[i] - mean[i];
    acc[i] += d * d;
  }
}

double SumSqDiffAvx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    __m256d d1 =
        _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
  }
  double s = HorizontalSum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void ReverseStepAvx2(double* x, const double* target,
                     const double* weight, const double* perturb,
                     double eta, std::size_t n) {
  const __m256d veta = _mm256_set1_pd(eta);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xi = _mm256_loadu_pd(x + i);
    __m256d t = _mm256_loadu_pd(target + i);
    __m256d w = _mm256_loadu_pd(weight + i);
    __m256d d = _mm256_fmadd_pd(w, _mm256_sub_pd(xi, t), t);
    __m256d upd = _mm256_fmadd_pd(veta, _mm256_sub_pd(d, xi), xi);
    upd = _mm256_add_pd(upd, _mm256_loadu_pd(perturb + i));
    _mm256_storeu_pd(x + i, _mm256_max_pd(upd, zero));
  }
  for (; i < n; ++i) {
    double xv = x[i];
    double d = target[i] + weight[i] * (xv - target[i]);
    x[i] = std::max(0.0, xv + eta * (d - xv) + perturb[i]);
  }
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{
      Backend::kAvx2,  DotAvx2,       SumAvx2,         CenteredDotAvx2,
      AccumulateAvx2,  AccumulateSqDevAvx2, SumSqDiffAvx2, ReverseStepAvx2};
  return table;
}

}  // namespace artifree::simd

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

#include <algorithm>

#include "artifree/simd/kernels.hpp"

namespace artifree::simd {
namespace {

double DotScalar(const float* a, const float* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return s;
}

double SumScalar(const float* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

double CenteredDotScalar(const float* a, double ma, const float* b, double mb,
                         std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (a[i] - ma) * (b[i] - mb);
  return s;
}

void AccumulateScalar(double* acc, const float* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += x[i];
}

void AccumulateSqDevScalar(double* acc, const float* x, const double* mean,
                           std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double d = x[i] - mean[i];
    acc[i] += d * d;
  }
}

double SumSqDiffScalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void ReverseStepScalar(double* x, const double* target,
                       const double* weight, const double* perturb,
                       double eta, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double xi = x[i];
    double d = target[i] + weight[i] * (xi - target[i]);
    x[i] = std::max(0.0, xi + eta * (d - xi) + perturb[i]);
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      Backend::kScalar,  DotScalar,       SumScalar,
      CenteredDotScalar, AccumulateScalar, AccumulateSqDevScalar,
      SumSqDiffScalar,   ReverseStepScalar};
  return table;
}

}  // namespace artifree::simd

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

// Data-parallel inner loops shared by the metric, ensemble and sampler code.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The variant is picked once at runtime from CPUID and can
// be forced with ARTIFREE_SIMD=scalar|avx2 or set_backend(). Vector variants
// reassociate sums, so they agree with the scalar path to rounding, not bits.

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace artifree::simd {

enum class Backend { kScalar, kAvx2 };

struct KernelTable {
  Backend backend;
  // sum_i a[i]*b[i], accumulated in double.
  double (*dot_f32)(const float* a, const float* b, std::size_t n);
  double (*sum_f32)(const float* a, std::size_t n);
  // sum_i (a[i]-ma)*(b[i]-mb)
  double (*centered_dot_f32)(const float* a, double ma, const float* b,
                             double mb, std::size_t n);
  // acc[i] += x[i]
  void (*accumulate_f32)(double* acc, const float* x, std::size_t n);
  // acc[i] += (x[i]-mean[i])^2
  void (*accumulate_sq_dev_f32)(double* acc, const float* x,
                                const double* mean, std::size_t n);
  // sum_i (a[i]-b[i])^2
  double (*sum_sq_diff_f64)(const double* a, const double* b, std::size_t n);
  // One toy reverse-diffusion update, in place, with w the per-bin noise
  // fraction of the observation:
  //   d    = target + w*(x - target)
  //   x   <- max(0, x + eta*(d - x) + perturb)
  void (*reverse_step_f64)(double* x, const double* target,
                           const double* weight, const double* perturb,
                           double eta, std::size_t n);
};

const KernelTable& scalar_kernels();
// Null when the AVX2 variants were not compiled in.
const KernelTable* avx2_kernels();
bool cpu_supports_avx2();

// Table in use. Initialized on first call from ARTIFREE_SIMD / CPUID.
const KernelTable& kernels();
// Forces a backend; throws InputError if unavailable on this build or CPU.
void set_backend(Backend b);
Backend active_backend();
std::string_view backend_name(Backend b);

inline double dot(std::span<const float> a, std::span<const float> b) {
  return kernels().dot_f32(a.data(), b.data(), a.size());
}
inline double sum(std::span<const float> a) {
  return kernels().sum_f32(a.data(), a.size());
}
inline double centered_dot(std::span<const float> a, double ma,
                           std::span<const float> b, double mb) {
  return kernels().centered_dot_f32(a.data(), ma, b.data(), mb, a.size());
}
inline double sum_sq_diff(std::span<const double> a,
                          std::span<const double> b) {
  return kernels().sum_sq_diff_f64(a.data(), b.data(), a.size());
}

}  // namespace artifree::simd

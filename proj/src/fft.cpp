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

#include "fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

namespace artifree::detail {
namespace {

struct FftwBuffer {
  explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {
    if (ptr == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  void* ptr;
};

struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [n, p] : plans_) {
      fftw_destroy_plan(p.forward);
      fftw_destroy_plan(p.backward);
    }
  }

  PlanPair get(int n) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    FftwBuffer real(sizeof(double) * n);
    FftwBuffer cplx(sizeof(fftw_complex) * (n / 2 + 1));
    PlanPair p;
    p.forward = fftw_plan_dft_r2c_1d(n, static_cast<double*>(real.ptr),
                                     static_cast<fftw_complex*>(cplx.ptr),
                                     FFTW_ESTIMATE);
    p.backward = fftw_plan_dft_c2r_1d(n, static_cast<fftw_complex*>(cplx.ptr),
                                      static_cast<double*>(real.ptr),
                                      FFTW_ESTIMATE);
    plans_.emplace(n, p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<int, PlanPair> plans_;
};

PlanCache& Cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

namespace {

// Per-thread plan handle and aligned scratch for the last size used; STFT
// calls arrive hundreds of frames at a time with a single size.
struct Scratch {
  int n = 0;
  PlanPair plan;
  std::unique_ptr<FftwBuffer> real, cplx;

  void prepare(int size) {
    if (size == n) return;
    plan = Cache().get(size);
    real = std::make_unique<FftwBuffer>(sizeof(double) * size);
    cplx = std::make_unique<FftwBuffer>(sizeof(fftw_complex) * (size / 2 + 1));
    n = size;
  }
  double* r() { return static_cast<double*>(real->ptr); }
  fftw_complex* c() { return static_cast<fftw_complex*>(cplx->ptr); }
};

Scratch& ThreadScratch() {
  thread_local Scratch s;
  return s;
}

}  // namespace

void real_fft(std::span<const double> in, std::span<std::complex<double>> out) {
  const int n = static_cast<int>(in.size());
  Scratch& s = ThreadScratch();
  s.prepare(n);
  std::copy(in.begin(), in.end(), s.r());
  fftw_execute_dft_r2c(s.plan.forward, s.r(), s.c());
  const fftw_complex* c = s.c();
  for (int k = 0; k <= n / 2; ++k) out[k] = {c[k][0], c[k][1]};
}

void inverse_real_fft(std::span<const std::complex<double>> in,
                      std::span<double> out) {
  const int n = static_cast<int>(out.size());
  Scratch& s = ThreadScratch();
  s.prepare(n);
  fftw_complex* c = s.c();
  for (int k = 0; k <= n / 2; ++k) {
    c[k][0] = in[k].real();
    c[k][1] = in[k].imag();
  }
  // c2r destroys its input; the scratch is rewritten on every call.
  fftw_execute_dft_c2r(s.plan.backward, c, s.r());
  std::copy_n(s.r(), n, out.begin());
}

}  // namespace artifree::detail

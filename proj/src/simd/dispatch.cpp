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

#include <atomic>
#include <cstdlib>
#include <string>

#include "artifree/error.hpp"
#include "artifree/simd/kernels.hpp"

namespace artifree::simd {

#if defined(ARTIFREE_HAVE_AVX2)
const KernelTable& avx2_kernel_table();
#endif

const KernelTable* avx2_kernels() {
#if defined(ARTIFREE_HAVE_AVX2)
  return &avx2_kernel_table();
#else
  return nullptr;
#endif
}

bool cpu_supports_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelTable* Resolve(Backend b) {
  if (b == Backend::kScalar) return &scalar_kernels();
  if (avx2_kernels() != nullptr && cpu_supports_avx2()) return avx2_kernels();
  return nullptr;
}

const KernelTable* InitialTable() {
  const char* env = std::getenv("ARTIFREE_SIMD");
  std::string choice = env ? env : "auto";
  if (choice == "scalar") return &scalar_kernels();
  if (const KernelTable* t = Resolve(Backend::kAvx2)) return t;
  return &scalar_kernels();
}

std::atomic<const KernelTable*>& Current() {
  static std::atomic<const KernelTable*> current{InitialTable()};
  return current;
}

}  // namespace

const KernelTable& kernels() {
  return *Current().load(std::memory_order_acquire);
}

void set_backend(Backend b) {
  const KernelTable* t = Resolve(b);
  if (t == nullptr)
    throw InputError("SIMD backend '" + std::string(backend_name(b)) +
                     "' is not available on this build or CPU");
  Current().store(t, std::memory_order_release);
}

Backend active_backend() { return kernels().backend; }

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace artifree::simd

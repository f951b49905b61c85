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

// Thin RAII layer over FFTW's real-to-complex transforms. Plans are cached
// per size behind a mutex; execution uses the new-array interface on
// per-call aligned buffers, so concurrent use is safe.

#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace artifree::detail {

// Forward real FFT of in.size() points; out receives n/2+1 bins.
void real_fft(std::span<const double> in, std::span<std::complex<double>> out);

// Inverse of real_fft, unnormalized (scaled by n); out.size() == n.
void inverse_real_fft(std::span<const std::complex<double>> in,
                      std::span<double> out);

}  // namespace artifree::detail

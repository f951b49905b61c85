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

// Frame-level embedding sequences: the built-in spectral reference encoder,
// the EMB1 interchange format, and alignment/pooling helpers.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "artifree/signal.hpp"

namespace artifree::emb {

/// T x D row-major (time-major) float matrix plus framing metadata.
struct EmbeddingSequence {
  std::size_t num_frames = 0;
  std::size_t dim = 0;
  std::vector<float> data;
  float frame_hop_ms = 0.0f;
  std::string source_tag = "builtin";

  std::span<const float> frame(std::size_t t) const {
    return {data.data() + t * dim, dim};
  }
  std::span<float> frame(std::size_t t) { return {data.data() + t * dim, dim}; }
  float at(std::size_t t, std::size_t d) const { return data[t * dim + d]; }
  // Throws InputError unless T >= 1, D >= 1, sizes agree, entries finite and
  // hop > 0.
  void validate() const;
};

EmbeddingSequence make_sequence(std::size_t num_frames, std::size_t dim,
                                std::vector<float> data, float frame_hop_ms,
                                std::string source_tag = "builtin");

struct EncoderConfig {
  signal::StftConfig stft;
  int num_mel = 40;
  double fmin_hz = 0.0;
  double fmax_hz = 0.0;  // 0 means Nyquist
  // Log-mel energies are clamped to at most top_db below the utterance
  // maximum; <= 0 disables the clamp.
  double top_db = 80.0;
};

// Triangular HTK-mel filterbank, num_mel x num_bins row-major.
std::vector<double> mel_filterbank(int num_mel, int num_bins, int sample_rate,
                                   double fmin_hz, double fmax_hz);

// Orthonormal n x n cosine basis (DCT-II), reflected so that its DC
// direction lands on the all-ones direction. A uniform shift of the log-mel
// vector then shifts every coefficient equally, which per-frame mean
// removal cancels.
const std::vector<double>& cosine_projection(int n);

// Deterministic log-mel + cosine projection encoder, D = num_mel.
EmbeddingSequence reference_encode(const signal::Waveform& w,
                                   const EncoderConfig& cfg = {});

// EMB1: "EMB1" | u16 version=1 | u32 T | u32 D | f32 hop_ms | T*D f32,
// little-endian, no padding.
inline constexpr std::size_t kEmb1HeaderBytes = 18;
std::vector<std::uint8_t> encode_emb(const EmbeddingSequence& seq);
EmbeddingSequence decode_emb(std::span<const std::uint8_t> bytes,
                             std::string source_tag = "external");
EmbeddingSequence read_emb(const std::filesystem::path& path);
void write_emb(const EmbeddingSequence& seq, const std::filesystem::path& path);

// Truncates every sequence to the shortest T. Throws IncompatibleError on D
// or hop mismatch and SizeError on an empty list.
std::vector<EmbeddingSequence> align(std::vector<EmbeddingSequence> seqs);

// Mean over the time axis.
std::vector<double> pool_mean(const EmbeddingSequence& seq);

}  // namespace artifree::emb

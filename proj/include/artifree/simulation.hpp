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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "artifree/diffusion.hpp"
#include "artifree/embeddings.hpp"
#include "artifree/signal.hpp"
#include "artifree/synth.hpp"

// Controlled ensemble generation: clean + noise at a target SNR, then S toy
// sampler runs with the clean signal as the denoising target.
namespace artifree::sim {

struct SourceUtterance {
  std::string id;
  signal::Waveform clean;
  std::optional<signal::Waveform> noise;  // generated when absent
  std::vector<synth::Segment> segments;   // empty for external audio
  std::optional<std::string> transcript_ref;
  double snr_db = 5.0;
  double halluc_rate = 0.0;
};

struct SimConfig {
  diffusion::SamplerConfig sampler;  // seed and halluc_rate are overridden
  emb::EncoderConfig encoder;
  std::size_t ensemble_size = 3;
  synth::NoiseColor noise_color = synth::NoiseColor::kWhite;
  std::uint64_t seed = 0;
  // When set, exactly this member hallucinates and no other does.
  std::optional<std::size_t> forced_member;
};

struct Candidate {
  diffusion::EnhanceResult result;
  emb::EmbeddingSequence embedding;
  std::optional<std::string> transcript_hyp;
};

struct SimulatedUtterance {
  std::string id;
  signal::Waveform clean;
  signal::Waveform noisy;
  emb::EmbeddingSequence clean_embedding;
  emb::EmbeddingSequence noisy_embedding;
  double snr_db = 0.0;
  std::optional<std::string> transcript_ref;
  std::vector<Candidate> candidates;
  bool label = false;  // any member hallucinated
};

// Stable per-utterance seed (FNV-1a of the id mixed with the run seed).
std::uint64_t utterance_seed(std::uint64_t seed, const std::string& id);

// Noisy mixture at src.snr_db; the noise is generated when src has none.
signal::Waveform make_noisy(const SourceUtterance& src, synth::NoiseColor color,
                            std::uint64_t seed);

SimulatedUtterance simulate(const SourceUtterance& src, const SimConfig& cfg);

// K synthetic utterances named syn0000.. with phoneme transcripts. SNRs
// cycle through `snrs`.
std::vector<SourceUtterance> synthetic_sources(std::size_t k,
                                               std::uint64_t seed,
                                               double seconds,
                                               const std::vector<double>& snrs);

// Transcript the toy ASR would produce for a member whose output carries
// `blob`: the phoneme under the blob is substituted, or one is inserted
// when the blob lands in silence. External audio without segments gets a
// proportional-position substitution.
std::string derive_hypothesis(const std::string& ref,
                              const std::vector<synth::Segment>& segments,
                              const diffusion::Blob& blob,
                              const signal::StftConfig& stft,
                              std::size_t num_samples);

}  // namespace artifree::sim

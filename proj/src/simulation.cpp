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

#include "artifree/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "artifree/error.hpp"
#include "artifree/rng.hpp"

namespace artifree::sim {

std::uint64_t utterance_seed(std::uint64_t seed, const std::string& id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h ^ splitmix64(seed));
}

namespace {

std::vector<std::string> Split(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string Join(const std::vector<std::string>& toks) {
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) out += (i ? " " : "") + toks[i];
  return out;
}

std::string OtherVowel(const std::string& current, std::size_t hint) {
  const auto inv = synth::vowel_inventory();
  for (std::size_t k = 0; k < inv.size(); ++k) {
    const std::string cand = inv[(hint + k) % inv.size()].label;
    if (cand != current) return cand;
  }
  return "ax";
}

}  // namespace

std::string derive_hypothesis(const std::string& ref,
                              const std::vector<synth::Segment>& segments,
                              const diffusion::Blob& blob,
                              const signal::StftConfig& stft,
                              std::size_t num_samples) {
  auto toks = Split(ref);
  const double center =
      blob.center_frame * stft.hop + 0.5 * stft.window_len;
  const std::size_t hint = static_cast<std::size_t>(std::max(0.0, blob.center_bin));
  if (segments.empty()) {
    if (toks.empty()) return "<unk>";
    const double frac = num_samples ? center / static_cast<double>(num_samples) : 0.0;
    const auto idx = std::min(
        toks.size() - 1,
        static_cast<std::size_t>(std::max(0.0, frac) * static_cast<double>(toks.size())));
    toks[idx] = "<unk>";
    return Join(toks);
  }
  const auto pos = static_cast<std::size_t>(std::max(0.0, center));
  std::size_t phoneme_index = 0;
  for (const auto& seg : segments) {
    const bool inside = pos >= seg.begin && pos < seg.end;
    const bool is_phone = seg.label != "sil";
    if (inside) {
      if (is_phone && phoneme_index < toks.size()) {
        toks[phoneme_index] = OtherVowel(toks[phoneme_index], hint);
      } else {
        toks.insert(toks.begin() + static_cast<std::ptrdiff_t>(
                                       std::min(phoneme_index, toks.size())),
                    OtherVowel("", hint));
      }
      return Join(toks);
    }
    if (is_phone) ++phoneme_index;
  }
  toks.push_back(OtherVowel("", hint));
  return Join(toks);
}

signal::Waveform make_noisy(const SourceUtterance& src, synth::NoiseColor color,
                            std::uint64_t seed) {
  const std::uint64_t useed = utterance_seed(seed, src.id);
  const signal::Waveform noise =
      src.noise ? *src.noise
                : synth::noise(color, src.clean.size(), src.clean.sample_rate,
                               splitmix64(useed ^ 0x6e6f6973ULL));
  return signal::mix_at_snr(src.clean, noise, src.snr_db, useed);
}

SimulatedUtterance simulate(const SourceUtterance& src, const SimConfig& cfg) {
  if (src.clean.samples.empty())
    throw InputError("simulation of " + src.id + " needs a clean reference");
  src.clean.validate();
  if (cfg.ensemble_size < 1) throw EnsembleSizeError("ensemble size must be >= 1");
  if (cfg.forced_member && *cfg.forced_member >= cfg.ensemble_size)
    throw InputError("forced member index out of range");

  const std::uint64_t useed = utterance_seed(cfg.seed, src.id);
  SimulatedUtterance out;
  out.id = src.id;
  out.clean = src.clean;
  out.snr_db = src.snr_db;
  out.transcript_ref = src.transcript_ref;

  out.noisy = make_noisy(src, cfg.noise_color, cfg.seed);
  out.clean_embedding = emb::reference_encode(out.clean, cfg.encoder);
  out.noisy_embedding = emb::reference_encode(out.noisy, cfg.encoder);

  const auto prepared =
      diffusion::prepare_input(out.noisy, out.clean, cfg.sampler.stft);
  for (std::size_t i = 0; i < cfg.ensemble_size; ++i) {
    diffusion::SamplerConfig c = cfg.sampler;
    c.seed = useed + i;  // same member streams as enhance_ensemble
    c.halluc_rate = src.halluc_rate;
    if (cfg.forced_member) {
      c.halluc_rate = 1.0;
      c.halluc_probability = (i == *cfg.forced_member) ? 1.0 : 0.0;
    }
    Candidate cand;
    cand.result = diffusion::enhance_detailed(prepared, c);
    cand.embedding = emb::reference_encode(cand.result.wave, cfg.encoder);
    if (src.transcript_ref) {
      cand.transcript_hyp =
          cand.result.blob
              ? derive_hypothesis(*src.transcript_ref, src.segments,
                                  *cand.result.blob, c.stft, out.clean.size())
              : *src.transcript_ref;
    }
    out.label = out.label || cand.result.blob.has_value();
    out.candidates.push_back(std::move(cand));
  }
  return out;
}

std::vector<SourceUtterance> synthetic_sources(std::size_t k,
                                               std::uint64_t seed,
                                               double seconds,
                                               const std::vector<double>& snrs) {
  if (snrs.empty()) throw InputError("no SNR values for synthetic sources");
  std::vector<SourceUtterance> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "syn%04zu", i);
    SourceUtterance s;
    s.id = id;
    auto utt = synth::synth_utterance(utterance_seed(seed, s.id), seconds);
    s.clean = std::move(utt.wave);
    s.segments = utt.segments;
    s.transcript_ref = Join(utt.phonemes());
    s.snr_db = snrs[i % snrs.size()];
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace artifree::sim

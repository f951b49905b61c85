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

// Artifact metrics between a reference and a test signal: log spectral
// distance, frame-wise embedding cosine distance, VAD mismatch duration and
// LPC formant-bandwidth divergence.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "artifree/embeddings.hpp"
#include "artifree/signal.hpp"

namespace artifree::metrics {

// Mean over frames of the RMS (over bins) difference of 20*log10(|X|+eps).
// Both inputs are truncated to the shorter T; bin count and rate must match.
double lsd(const signal::MagnitudeSpectrogram& ref,
           const signal::MagnitudeSpectrogram& test);
double lsd(const signal::Waveform& ref, const signal::Waveform& test,
           const signal::StftConfig& cfg = {});

// Mean over aligned frames of 1 - cos(a_t, b_t), optionally after removing
// each frame's mean across dimensions. A frame where both vectors have zero
// norm scores 0; where exactly one does, 1.
double emb_cosine_distance(const emb::EmbeddingSequence& a,
                           const emb::EmbeddingSequence& b,
                           bool mean_remove = true);

struct VadConfig {
  signal::StftConfig framing;
  double abs_floor = 1e-4;
  double rel_factor = 0.05;
  double rel_percentile = 95.0;
  int hangover_frames = 3;
};

// Frame is active iff RMS > max(abs_floor, rel_factor * P(rel_percentile) of
// frame RMS); each active frame keeps the next hangover_frames active.
std::vector<bool> vad_decisions(const signal::Waveform& w,
                                const VadConfig& cfg = {});

// Seconds where the two decision tracks differ (truncated to the shorter).
double vad_mismatch(const signal::Waveform& a, const signal::Waveform& b,
                    const VadConfig& cfg = {});

struct FormantConfig {
  VadConfig vad;
  double pre_emphasis = 0.97;
  int lpc_order = 0;  // 0 means 2 + rate/1000
  signal::WindowType window = signal::WindowType::kHamming;
  int num_formants = 3;
  // Candidate screening: roots below min_freq_hz or wider than
  // max_bandwidth_hz are not formants.
  double min_freq_hz = 90.0;
  double max_bandwidth_hz = 400.0;
};

struct Resonance {
  double freq_hz = 0.0;
  double bandwidth_hz = 0.0;
};

// Autocorrelation-method LPC via Levinson-Durbin: returns [1, a1..a_order].
// An all-zero frame returns [1, 0, ..., 0].
std::vector<double> lpc(std::span<const double> frame, int order);

// Resonances of 1/A(z) from the upper-half-plane roots of A, sorted by
// frequency, screened per cfg. No pre-emphasis or windowing is applied.
std::vector<Resonance> lpc_resonances(std::span<const double> a,
                                      int sample_rate,
                                      const FormantConfig& cfg = {});

// Per-frame formant tracks (empty vector for frames without a defined
// analysis) of a whole waveform.
std::vector<std::vector<Resonance>> formant_tracks(const signal::Waveform& w,
                                                   const FormantConfig& cfg = {});

// Mean absolute bandwidth difference of the first num_formants resonances,
// averaged over frames voiced in both signals. nullopt when no frame
// qualifies.
std::optional<double> formant_bandwidth_divergence(
    const signal::Waveform& a, const signal::Waveform& b,
    const FormantConfig& cfg = {});

}  // namespace artifree::metrics

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

// A seedable stand-in for a diffusion speech enhancer.
//
// The sampler runs N reverse steps on the magnitude spectrogram, starting
// from the noisy magnitude:
//
//   x <- max(0, x + eta * (d - x) + sigma_k * xi_k * (target + floor))
//   d = target + w * (x - target),  w = |N|^2 / (|Y|^2 + |N|^2)
//   sigma_k = sigma0 * decay^k
//
// where target is the clean-hint magnitude, |Y|^2 the observed power and
// |N|^2 the oracle noise power per bin, so low-SNR bins converge slowly and
// keep more of the stochastic perturbation. A hallucination adds a Gaussian time-frequency bump to the
// target from a seeded step onward; the per-step hazard is chosen so that
// the hallucination probability over reference_steps steps equals
//
//   p = halluc_rate * clamp((10 - snr_db) / 20, 0, 1).
//
// The result is resynthesized with the noisy phase. The clean hint makes
// this a simulator for producing controlled ensembles, not an enhancer.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "artifree/signal.hpp"

namespace artifree::diffusion {

struct SamplerConfig {
  int n_steps = 30;
  double noise_sigma0 = 0.05;
  double decay = 0.9;
  double step_gain = 0.3;  // eta
  double halluc_rate = 0.0;
  double halluc_strength = 3.0;  // bump peak relative to the 95th-percentile
                                 // clean magnitude
  // Overrides the SNR-scaled probability when set.
  std::optional<double> halluc_probability;
  int reference_steps = 30;
  std::uint64_t seed = 0;
  signal::StftConfig stft;

  void validate() const;
};

struct Blob {
  std::size_t frame_begin = 0, frame_end = 0;  // [begin, end)
  std::size_t bin_begin = 0, bin_end = 0;      // [begin, end)
  double center_frame = 0.0, center_bin = 0.0;
  double sigma_frames = 1.0, sigma_bins = 1.0;
  double amplitude = 0.0;
  int inject_step = 0;

  bool contains(std::size_t t, std::size_t f) const {
    return t >= frame_begin && t < frame_end && f >= bin_begin && f < bin_end;
  }
};

struct EnhanceResult {
  signal::Waveform wave;
  signal::MagnitudeSpectrogram magnitude;  // before resynthesis
  std::optional<Blob> blob;                // set when a hallucination occurred
  double input_snr_db = 0.0;
  double halluc_probability = 0.0;
};

double hallucination_probability(const SamplerConfig& cfg, double snr_db);

// Per-utterance analysis shared by every member of an ensemble: the noisy
// spectrogram plus the oracle quantities derived from the clean hint (target
// magnitude, Wiener weights, perturbation floor, input SNR). Timed inference
// covers the reverse steps and resynthesis only.
struct PreparedInput {
  std::size_t length = 0;
  int sample_rate = 0;
  signal::Spectrogram observed;
  std::vector<double> observed_mag, target, weight;
  double floor_level = 0.0;
  double ref_level = 0.0;  // 95th-percentile target magnitude
  signal::SnrEstimate snr;
};

// Noisy and clean hint must have equal length and rate.
PreparedInput prepare_input(const signal::Waveform& noisy,
                            const signal::Waveform& clean_hint,
                            const signal::StftConfig& stft = {});

// Throws IncompatibleError when cfg.stft differs from the prepared analysis.
EnhanceResult enhance_detailed(const PreparedInput& in, const SamplerConfig& cfg);

EnhanceResult enhance_detailed(const signal::Waveform& noisy,
                               const signal::Waveform& clean_hint,
                               const SamplerConfig& cfg);

signal::Waveform enhance_once(const signal::Waveform& noisy,
                              const signal::Waveform& clean_hint,
                              const SamplerConfig& cfg);

// S runs with seeds cfg.seed + i, in index order. With jobs > 1 members run
// on worker threads; results are identical to serial execution.
std::vector<EnhanceResult> enhance_ensemble(const signal::Waveform& noisy,
                                            const signal::Waveform& clean_hint,
                                            const SamplerConfig& cfg,
                                            std::size_t ensemble_size,
                                            int jobs = 1);

struct RtfMeasurement {
  double rtf = 0.0;           // median wall-clock seconds per audio second
  int n_steps = 0;
  double audio_seconds = 0.0;
  double per_step_rtf = 0.0;  // rtf / n_steps
  std::vector<double> samples;
};

// Times `run` `repeats` times and reports the median. Throws InputError when
// audio_seconds <= 0.
RtfMeasurement measure_rtf(const std::function<void()>& run,
                           double audio_seconds, int n_steps, int repeats = 5);

}  // namespace artifree::diffusion

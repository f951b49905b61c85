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

// Deterministic synthetic speech and noise for fixtures and the simulator:
// all-pole "vowels" driven by a glottal pulse train, separated by pauses,
// with white or pink additive noise.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "artifree/signal.hpp"

namespace artifree::synth {

struct Resonance {
  double freq_hz = 0.0;
  double bandwidth_hz = 0.0;
};

// Pole radius of a resonance: exp(-pi * bandwidth / rate).
double pole_radius(double bandwidth_hz, int sample_rate);

// Denominator coefficients [1, a1, ..., a_2K] of the cascade of second-order
// resonators.
std::vector<double> all_pole_coefficients(std::span<const Resonance> res,
                                          int sample_rate);

// y[n] = x[n] - sum_k a[k] y[n-k]
std::vector<double> all_pole_filter(std::span<const double> a,
                                    std::span<const double> x);

// Steady vowel from white-noise excitation that is pre-compensated for a
// first-order pre-emphasis with coefficient `emphasis` (0 disables), so
// that the pre-emphasized signal is exactly all-pole.
signal::Waveform noise_excited_vowel(std::span<const Resonance> res,
                                     double seconds, int sample_rate,
                                     std::uint64_t seed,
                                     double emphasis = 0.97);

struct Segment {
  std::string label;         // phoneme symbol; "sil" for pauses
  std::size_t begin = 0;     // sample index, inclusive
  std::size_t end = 0;       // sample index, exclusive
};

struct Utterance {
  signal::Waveform wave;
  std::vector<Segment> segments;

  // Phoneme labels of the voiced segments, in order.
  std::vector<std::string> phonemes() const;
};

// Vowel inventory used by synth_utterance.
struct VowelSpec {
  const char* label;
  Resonance formants[3];
};
std::span<const VowelSpec> vowel_inventory();

Utterance synth_utterance(std::uint64_t seed, double seconds,
                          int sample_rate = 16000);

enum class NoiseColor { kWhite, kPink };
NoiseColor parse_noise_color(const std::string& s);

signal::Waveform noise(NoiseColor color, std::size_t n, int sample_rate,
                       std::uint64_t seed);

signal::Waveform tone(double freq_hz, std::size_t n, int sample_rate,
                      double amplitude = 0.5);

}  // namespace artifree::synth

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

#include "artifree/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "artifree/error.hpp"
#include "artifree/rng.hpp"

namespace artifree::synth {

double pole_radius(double bandwidth_hz, int sample_rate) {
  return std::exp(-std::numbers::pi * bandwidth_hz / sample_rate);
}

std::vector<double> all_pole_coefficients(std::span<const Resonance> res,
                                          int sample_rate) {
  std::vector<double> a{1.0};
  for (const auto& r : res) {
    const double radius = pole_radius(r.bandwidth_hz, sample_rate);
    const double theta = 2.0 * std::numbers::pi * r.freq_hz / sample_rate;
    const double section[3] = {1.0, -2.0 * radius * std::cos(theta),
                               radius * radius};
    std::vector<double> next(a.size() + 2, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (int j = 0; j < 3; ++j) next[i + j] += a[i] * section[j];
    a = std::move(next);
  }
  return a;
}

std::vector<double> all_pole_filter(std::span<const double> a,
                                    std::span<const double> x) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = x[n];
    for (std::size_t k = 1; k < a.size() && k <= n; ++k) acc -= a[k] * y[n - k];
    y[n] = acc;
  }
  return y;
}

signal::Waveform noise_excited_vowel(std::span<const Resonance> res,
                                     double seconds, int sample_rate,
                                     std::uint64_t seed, double emphasis) {
  const auto n = static_cast<std::size_t>(seconds * sample_rate);
  auto gen = make_stream(seed, 11);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> excitation(n);
  for (auto& v : excitation) v = gauss(gen);
  // 1/(1 - emphasis z^-1) undoes the pre-emphasis applied at analysis time.
  if (emphasis != 0.0) {
    const double de[2] = {1.0, -emphasis};
    excitation = all_pole_filter(de, excitation);
  }
  auto y = all_pole_filter(all_pole_coefficients(res, sample_rate), excitation);
  double peak = 0.0;
  for (double v : y) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (auto& v : y) v *= 0.5 / peak;
  return signal::Waveform{std::move(y), sample_rate};
}

std::vector<std::string> Utterance::phonemes() const {
  std::vector<std::string> out;
  for (const auto& s : segments)
    if (s.label != "sil") out.push_back(s.label);
  return out;
}

std::span<const VowelSpec> vowel_inventory() {
  static const VowelSpec kVowels[] = {
      {"aa", {{730, 80}, {1090, 90}, {2440, 120}}},
      {"iy", {{270, 60}, {2290, 100}, {3010, 120}}},
      {"uw", {{300, 60}, {870, 80}, {2240, 110}}},
      {"eh", {{530, 70}, {1840, 100}, {2480, 120}}},
      {"ao", {{570, 70}, {840, 80}, {2410, 120}}},
      {"ae", {{660, 80}, {1720, 100}, {2410, 120}}},
  };
  return kVowels;
}

Utterance synth_utterance(std::uint64_t seed, double seconds,
                          int sample_rate) {
  if (!(seconds > 0.0)) throw InputError("utterance duration must be positive");
  const auto total = static_cast<std::size_t>(seconds * sample_rate);
  auto gen = make_stream(seed, 7);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(gen); };
  std::normal_distribution<double> gauss(0.0, 1.0);

  Utterance u;
  u.wave.sample_rate = sample_rate;
  u.wave.samples.assign(total, 0.0);
  const auto vowels = vowel_inventory();

  auto ms = [&](double v) { return static_cast<std::size_t>(v * 1e-3 * sample_rate); };
  std::size_t pos = ms(uni(60, 120));
  u.segments.push_back({"sil", 0, pos});
  while (true) {
    const std::size_t len = ms(uni(120, 240));
    const std::size_t gap = ms(uni(40, 140));
    if (pos + len + ms(60) > total) break;
    const auto& v = vowels[gen() % vowels.size()];
    const double f0 = uni(100, 190);
    std::vector<Resonance> res(std::begin(v.formants), std::end(v.formants));
    for (auto& r : res) r.freq_hz *= uni(0.95, 1.05);
    const auto a = all_pole_coefficients(res, sample_rate);

    // Glottal pulse train with light jitter plus aspiration.
    std::vector<double> src(len, 0.0);
    double phase = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      phase += f0 * (1.0 + 0.01 * gauss(gen)) / sample_rate;
      if (phase >= 1.0) {
        phase -= 1.0;
        src[i] += 1.0;
      }
      src[i] += 0.02 * gauss(gen);
    }
    auto voiced = all_pole_filter(a, src);
    double peak = 0.0;
    for (double s : voiced) peak = std::max(peak, std::abs(s));
    const double amp = uni(0.35, 0.5) / std::max(peak, 1e-12);
    for (std::size_t i = 0; i < len; ++i) {
      // Raised-cosine onset/offset over 15 ms.
      const double edge = static_cast<double>(ms(15));
      double env = 1.0;
      if (i < edge) env = 0.5 - 0.5 * std::cos(std::numbers::pi * i / edge);
      if (len - i < edge)
        env = 0.5 - 0.5 * std::cos(std::numbers::pi * (len - i) / edge);
      u.wave.samples[pos + i] = amp * env * voiced[i];
    }
    u.segments.push_back({v.label, pos, pos + len});
    const std::size_t next = std::min(pos + len + gap, total);
    u.segments.push_back({"sil", pos + len, next});
    pos = next;
  }
  if (pos < total) {
    if (u.segments.back().label == "sil")
      u.segments.back().end = total;
    else
      u.segments.push_back({"sil", pos, total});
  }
  return u;
}

NoiseColor parse_noise_color(const std::string& s) {
  if (s == "white") return NoiseColor::kWhite;
  if (s == "pink") return NoiseColor::kPink;
  throw InputError("unknown noise color '" + s + "'");
}

signal::Waveform noise(NoiseColor color, std::size_t n, int sample_rate,
                       std::uint64_t seed) {
  auto gen = make_stream(seed, 3);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> x(n);
  if (color == NoiseColor::kWhite) {
    for (auto& v : x) v = 0.1 * gauss(gen);
  } else {
    // Paul Kellet's economy pink filter.
    double b0 = 0, b1 = 0, b2 = 0;
    for (auto& v : x) {
      const double w = gauss(gen);
      b0 = 0.99765 * b0 + w * 0.0990460;
      b1 = 0.96300 * b1 + w * 0.2965164;
      b2 = 0.57000 * b2 + w * 1.0526913;
      v = 0.05 * (b0 + b1 + b2 + w * 0.1848);
    }
  }
  return signal::Waveform{std::move(x), sample_rate};
}

signal::Waveform tone(double freq_hz, std::size_t n, int sample_rate,
                      double amplitude) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = amplitude *
           std::sin(2.0 * std::numbers::pi * freq_hz * i / sample_rate);
  return signal::Waveform{std::move(x), sample_rate};
}

}  // namespace artifree::synth

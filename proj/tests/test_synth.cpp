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

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "artifree/diffusion.hpp"
#include "artifree/error.hpp"
#include "artifree/metrics.hpp"
#include "artifree/scoring.hpp"
#include "artifree/simulation.hpp"
#include "artifree/synth.hpp"

using namespace artifree;
using namespace artifree::synth;

TEST_SUITE("synth") {

TEST_CASE("pole radius and all-pole coefficients") {
  CHECK(pole_radius(100.0, 16000) == doctest::Approx(std::exp(-std::numbers::pi * 100.0 / 16000)));
  const Resonance r[] = {{1000.0, 100.0}};
  const auto a = all_pole_coefficients(r, 16000);
  REQUIRE(a.size() == 3);
  const double rad = pole_radius(100.0, 16000);
  CHECK(a[0] == 1.0);
  CHECK(a[1] == doctest::Approx(-2 * rad * std::cos(2 * std::numbers::pi * 1000.0 / 16000)));
  CHECK(a[2] == doctest::Approx(rad * rad));

  // Impulse response of 1/(1 + a1 z^-1 + a2 z^-2).
  const std::vector<double> imp{1, 0, 0, 0};
  const auto h = all_pole_filter(a, imp);
  CHECK(h[0] == 1.0);
  CHECK(h[1] == doctest::Approx(-a[1]));
  CHECK(h[2] == doctest::Approx(a[1] * a[1] - a[2]));
}

TEST_CASE("noise-excited vowel carries its formants") {
  const auto& v = vowel_inventory()[0];
  const auto w = noise_excited_vowel(v.formants, 0.5, 16000, 4, 0.0);
  CHECK(w.size() == 8000);
  std::vector<double> x(w.samples.begin(), w.samples.end());
  const auto res = metrics::lpc_resonances(metrics::lpc(x, 12), 16000);
  REQUIRE(res.size() >= 3);
  for (int k = 0; k < 3; ++k)
    CHECK(std::abs(res[k].freq_hz - v.formants[k].freq_hz) < 0.05 * v.formants[k].freq_hz);
}

TEST_CASE("utterances tile the signal with labelled segments") {
  const auto u = synth_utterance(9, 1.5, 16000);
  CHECK(u.wave.size() == 24000);
  REQUIRE_FALSE(u.segments.empty());
  CHECK(u.segments.front().begin == 0);
  CHECK(u.segments.back().end == u.wave.size());
  for (std::size_t i = 1; i < u.segments.size(); ++i)
    CHECK(u.segments[i].begin == u.segments[i - 1].end);
  std::set<std::string> known{"sil"};
  for (const auto& v : vowel_inventory()) known.insert(v.label);
  for (const auto& s : u.segments) CHECK(known.count(s.label) == 1);
  CHECK_FALSE(u.phonemes().empty());
  CHECK(synth_utterance(9, 1.5, 16000).wave.samples == u.wave.samples);
  CHECK(synth_utterance(10, 1.5, 16000).wave.samples != u.wave.samples);
}

TEST_CASE("noise colours") {
  const auto w = noise(NoiseColor::kWhite, 32000, 16000, 1);
  const auto p = noise(NoiseColor::kPink, 32000, 16000, 1);
  CHECK(w.samples == noise(NoiseColor::kWhite, 32000, 16000, 1).samples);
  // Pink noise puts more of its power below 1 kHz than white noise does.
  auto low_fraction = [](const signal::Waveform& x) {
    const auto m = signal::stft(x).magnitude();
    double low = 0.0, all = 0.0;
    for (std::size_t t = 0; t < m.num_frames; ++t)
      for (std::size_t f = 0; f < m.num_bins; ++f) {
        const double e = m.at(t, f) * m.at(t, f);
        all += e;
        if (f * 16000.0 / 510.0 < 1000.0) low += e;
      }
    return low / all;
  };
  CHECK(low_fraction(p) > 2.0 * low_fraction(w));
  CHECK(parse_noise_color("pink") == NoiseColor::kPink);
  CHECK_THROWS_AS(parse_noise_color("brown"), InputError);
  const auto t = tone(1000.0, 16, 16000, 0.5);
  CHECK(t.samples[4] == doctest::Approx(0.5 * std::sin(2 * std::numbers::pi * 1000.0 * 4 / 16000)));
}

TEST_CASE("simulated hypotheses follow the blob") {
  const std::vector<Segment> segs{{"sil", 0, 1000}, {"a", 1000, 5000}, {"i", 5000, 8000}};
  signal::StftConfig stft;
  diffusion::Blob blob;
  blob.center_frame = (3000.0 - stft.window_len / 2.0) / stft.hop;
  const auto hyp = sim::derive_hypothesis("a i", segs, blob, stft, 8000);
  CHECK(hyp != "a i");
  CHECK(hyp.substr(hyp.size() - 2) == " i");
  CHECK(metrics::edit_distance(metrics::tokenize("a i", metrics::TokenLevel::kWord),
                               metrics::tokenize(hyp, metrics::TokenLevel::kWord))
            .substitutions == 1);
  blob.center_frame = 0.0;
  const auto ins = sim::derive_hypothesis("a i", segs, blob, stft, 8000);
  CHECK(metrics::edit_distance(metrics::tokenize("a i", metrics::TokenLevel::kWord),
                               metrics::tokenize(ins, metrics::TokenLevel::kWord))
            .insertions == 1);
  const auto unk = sim::derive_hypothesis("x y z", {}, blob, stft, 8000);
  CHECK(unk == "<unk> y z");
}

TEST_CASE("simulation labels and seeds") {
  const auto src = sim::synthetic_sources(3, 5, 0.6, {0.0, 10.0});
  REQUIRE(src.size() == 3);
  CHECK(src[0].id == "syn0000");
  CHECK(src[1].snr_db == 10.0);
  CHECK(src[2].snr_db == 0.0);
  CHECK(sim::utterance_seed(1, "a") != sim::utterance_seed(1, "b"));
  CHECK(sim::utterance_seed(1, "a") == sim::utterance_seed(1, "a"));

  sim::SimConfig cfg;
  cfg.ensemble_size = 3;
  cfg.forced_member = 1;
  const auto u = sim::simulate(src[0], cfg);
  REQUIRE(u.candidates.size() == 3);
  CHECK(u.label);
  CHECK_FALSE(u.candidates[0].result.blob.has_value());
  CHECK(u.candidates[1].result.blob.has_value());
  CHECK(u.candidates[0].transcript_hyp == u.transcript_ref);
  CHECK(u.candidates[1].transcript_hyp != u.transcript_ref);
  CHECK(u.noisy.samples == sim::simulate(src[0], cfg).noisy.samples);
}

}  // TEST_SUITE

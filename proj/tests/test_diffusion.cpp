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

#include "artifree/artifact.hpp"
#include "artifree/diffusion.hpp"
#include "artifree/embeddings.hpp"
#include "artifree/error.hpp"
#include "artifree/metrics.hpp"
#include "artifree/synth.hpp"

using namespace artifree;
using namespace artifree::diffusion;

namespace {

struct Pair {
  signal::Waveform clean, noisy;
};

Pair MakePair(double snr_db, std::uint64_t seed = 11) {
  Pair p;
  p.clean = synth::synth_utterance(seed, 1.0, 16000).wave;
  const auto n = synth::noise(synth::NoiseColor::kWhite, p.clean.size(), 16000, seed + 1);
  p.noisy = signal::mix_at_snr(p.clean, n, snr_db, seed);
  return p;
}

double Variance(const std::vector<EnhanceResult>& members) {
  std::vector<emb::EmbeddingSequence> e;
  for (const auto& m : members) e.push_back(emb::reference_encode(m.wave));
  return artifact::artifact_score(artifact::frame_variance(e));
}

}  // namespace

TEST_SUITE("diffusion") {

TEST_CASE("same seed gives bit-identical output") {
  const auto p = MakePair(5.0);
  SamplerConfig cfg;
  cfg.seed = 42;
  cfg.halluc_rate = 1.0;
  const auto a = enhance_detailed(p.noisy, p.clean, cfg);
  const auto b = enhance_detailed(p.noisy, p.clean, cfg);
  CHECK(a.wave.samples == b.wave.samples);
  CHECK(a.blob.has_value() == b.blob.has_value());
  cfg.seed = 43;
  const auto c = enhance_detailed(p.noisy, p.clean, cfg);
  CHECK(metrics::lsd(a.magnitude, c.magnitude) > 0.0);
}

TEST_CASE("ensemble member i uses seed + i and jobs do not matter") {
  const auto p = MakePair(5.0);
  SamplerConfig cfg;
  cfg.seed = 7;
  const auto serial = enhance_ensemble(p.noisy, p.clean, cfg, 3, 1);
  const auto parallel = enhance_ensemble(p.noisy, p.clean, cfg, 3, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    SamplerConfig c = cfg;
    c.seed = 7 + i;
    CHECK(enhance_once(p.noisy, p.clean, c).samples == serial[i].wave.samples);
    CHECK(parallel[i].wave.samples == serial[i].wave.samples);
  }
  CHECK_THROWS_AS(enhance_ensemble(p.noisy, p.clean, cfg, 0), EnsembleSizeError);
}

TEST_CASE("noise-free sampler without hallucination has zero ensemble variance") {
  const auto p = MakePair(5.0);
  SamplerConfig cfg;
  cfg.noise_sigma0 = 0.0;
  const auto members = enhance_ensemble(p.noisy, p.clean, cfg, 4);
  CHECK(Variance(members) == 0.0);
}

TEST_CASE("hallucination probability") {
  SamplerConfig cfg;
  cfg.halluc_rate = 1.0;
  CHECK(hallucination_probability(cfg, -10.0) == 1.0);
  CHECK(hallucination_probability(cfg, 0.0) == doctest::Approx(0.5));
  CHECK(hallucination_probability(cfg, 10.0) == 0.0);
  cfg.halluc_probability = 0.25;
  CHECK(hallucination_probability(cfg, 30.0) == 0.25);
  cfg.halluc_rate = 0.0;
  cfg.halluc_probability.reset();
  CHECK(hallucination_probability(cfg, -40.0) == 0.0);
  CHECK_THROWS_AS(hallucination_probability(cfg, std::nan("")), InputError);
}

TEST_CASE("blob only touches its support") {
  const auto p = MakePair(0.0);
  SamplerConfig off, on;
  off.seed = on.seed = 9;
  off.halluc_probability = 0.0;
  on.halluc_probability = 1.0;
  const auto a = enhance_detailed(p.noisy, p.clean, off);
  const auto b = enhance_detailed(p.noisy, p.clean, on);
  CHECK_FALSE(a.blob.has_value());
  REQUIRE(b.blob.has_value());
  CHECK(b.blob->inject_step == 0);
  const auto& blob = *b.blob;
  std::size_t inside_changed = 0;
  for (std::size_t t = 0; t < a.magnitude.num_frames; ++t)
    for (std::size_t f = 0; f < a.magnitude.num_bins; ++f) {
      const double d = b.magnitude.at(t, f) - a.magnitude.at(t, f);
      if (blob.contains(t, f))
        inside_changed += d > 0.0;
      else
        CHECK(d == 0.0);
    }
  CHECK(inside_changed > 0);
  CHECK(blob.frame_end - blob.frame_begin >= 8);
  CHECK(blob.frame_end - blob.frame_begin <= 20);
}

TEST_CASE("hallucinating ensembles score higher") {
  const auto p = MakePair(-10.0);
  SamplerConfig cfg;
  cfg.seed = 3;
  cfg.noise_sigma0 = 0.01;
  const double quiet = Variance(enhance_ensemble(p.noisy, p.clean, cfg, 5));
  cfg.halluc_rate = 1.0;
  const double loud = Variance(enhance_ensemble(p.noisy, p.clean, cfg, 5));
  CHECK(loud > quiet);
}

TEST_CASE("more steps move closer to the clean target") {
  const auto p = MakePair(0.0);
  const auto ref = signal::stft(p.clean).magnitude();
  SamplerConfig cfg;
  cfg.seed = 5;
  double prev = 1e300;
  for (int n : {2, 5, 10, 30}) {
    cfg.n_steps = n;
    const double d = metrics::lsd(enhance_detailed(p.noisy, p.clean, cfg).magnitude, ref);
    CHECK(d < prev);
    prev = d;
  }
}

TEST_CASE("faster decay lowers ensemble variance") {
  const auto p = MakePair(5.0);
  SamplerConfig cfg;
  cfg.decay = 0.95;
  const double slow = Variance(enhance_ensemble(p.noisy, p.clean, cfg, 4));
  cfg.decay = 0.5;
  const double fast = Variance(enhance_ensemble(p.noisy, p.clean, cfg, 4));
  CHECK(fast < slow);
}

TEST_CASE("config validation") {
  const auto p = MakePair(5.0);
  SamplerConfig cfg;
  cfg.n_steps = 0;
  CHECK_THROWS_AS(enhance_once(p.noisy, p.clean, cfg), InputError);
  cfg = {};
  cfg.decay = 1.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.halluc_rate = 2.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  signal::Waveform shorter = p.clean;
  shorter.samples.resize(8000);
  CHECK_THROWS_AS(enhance_once(p.noisy, shorter, SamplerConfig{}), IncompatibleError);
}

TEST_CASE("a shared prepared input reproduces the direct path") {
  const auto p = MakePair(-5.0);
  SamplerConfig cfg;
  cfg.seed = 12;
  cfg.halluc_rate = 1.0;
  const auto in = prepare_input(p.noisy, p.clean, cfg.stft);
  const auto direct = enhance_detailed(p.noisy, p.clean, cfg);
  const auto shared = enhance_detailed(in, cfg);
  CHECK(direct.wave.samples == shared.wave.samples);
  CHECK(direct.magnitude.data == shared.magnitude.data);
  CHECK(direct.blob.has_value() == shared.blob.has_value());
  // The shared target is copied before the blob is added.
  CHECK(enhance_detailed(in, cfg).wave.samples == direct.wave.samples);

  SamplerConfig other = cfg;
  other.stft.hop = 64;
  CHECK_THROWS_AS(enhance_detailed(in, other), IncompatibleError);
}

TEST_CASE("measured RTF scales with N") {
  const auto p = MakePair(5.0);
  auto time_for = [&](int n) {
    SamplerConfig cfg;
    cfg.n_steps = n;
    const auto in = prepare_input(p.noisy, p.clean, cfg.stft);
    return measure_rtf([&] { enhance_detailed(in, cfg); },
                       p.noisy.duration_seconds(), n, 5)
        .rtf;
  };
  const double r10 = time_for(10), r30 = time_for(30);
  CHECK(r10 > 0.0);
  CHECK(r30 / r10 > 1.5);
  CHECK_THROWS_AS(measure_rtf([] {}, 0.0, 1), InputError);
}

}  // TEST_SUITE

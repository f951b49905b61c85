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
#include <cstring>
#include <filesystem>
#include <random>

#include "artifree/error.hpp"
#include "artifree/signal.hpp"
#include "artifree/synth.hpp"
#include "oracles.hpp"

using namespace artifree;
using namespace artifree::signal;

namespace {

std::vector<std::uint8_t> Pcm16Header(std::uint32_t data_bytes, std::uint16_t channels = 1,
                                      std::uint16_t format = 1, std::uint16_t bits = 16) {
  std::vector<std::uint8_t> b;
  auto tag = [&](const char* t) { b.insert(b.end(), t, t + 4); };
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xff);
  };
  auto u16 = [&](std::uint16_t v) {
    b.push_back(v & 0xff);
    b.push_back(v >> 8);
  };
  tag("RIFF");
  u32(36 + data_bytes);
  tag("WAVE");
  tag("fmt ");
  u32(16);
  u16(format);
  u16(channels);
  u32(16000);
  u32(16000 * channels * bits / 8);
  u16(channels * bits / 8);
  u16(bits);
  tag("data");
  u32(data_bytes);
  return b;
}

Waveform Noise(std::size_t n, std::uint64_t seed, double scale = 0.1) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> d(0.0, scale);
  Waveform w;
  w.samples.resize(n);
  for (auto& s : w.samples) s = d(g);
  return w;
}

}  // namespace

TEST_SUITE("signal") {

TEST_CASE("pcm16 full-scale positive sample reads as 32767/32768") {
  auto b = Pcm16Header(2);
  b.push_back(0xff);
  b.push_back(0x7f);
  const auto w = decode_wav(b);
  REQUIRE(w.size() == 1);
  CHECK(w.samples[0] == 32767.0 / 32768.0);
  CHECK(w.sample_rate == 16000);
}

TEST_CASE("one second at 16 kHz yields 16000 samples") {
  const auto bytes = encode_wav(Waveform{std::vector<double>(16000, 0.25), 16000});
  CHECK(decode_wav(bytes).size() == 16000);
}

TEST_CASE("truncated data chunk is a format error") {
  auto b = Pcm16Header(200);
  b.resize(b.size() + 100);
  CHECK_THROWS_AS(decode_wav(b), FormatError);
  std::vector<std::uint8_t> tiny{'R', 'I', 'F', 'F'};
  CHECK_THROWS_AS(decode_wav(tiny), FormatError);
}

TEST_CASE("unsupported encodings are rejected") {
  auto b = Pcm16Header(3, 1, 1, 24);
  b.resize(b.size() + 3);
  CHECK_THROWS_AS(decode_wav(b), UnsupportedError);
  auto alaw = Pcm16Header(2, 1, 6, 8);
  alaw.resize(alaw.size() + 2);
  CHECK_THROWS_AS(decode_wav(alaw), UnsupportedError);
}

TEST_CASE("stereo takes channel 0") {
  auto b = Pcm16Header(8, 2);
  const std::int16_t frames[4] = {1000, -5, -2000, 7};
  const auto* p = reinterpret_cast<const std::uint8_t*>(frames);
  b.insert(b.end(), p, p + 8);
  const auto w = decode_wav(b);
  REQUIRE(w.size() == 2);
  CHECK(w.samples[0] == 1000.0 / 32768.0);
  CHECK(w.samples[1] == -2000.0 / 32768.0);
}

TEST_CASE("pcm16 round trip is bit exact") {
  std::mt19937_64 g(3);
  std::uniform_int_distribution<int> d(-32768, 32767);
  Waveform w;
  for (int i = 0; i < 4096; ++i) w.samples.push_back(d(g) / 32768.0);
  const auto bytes = encode_wav(w, WavEncoding::kPcm16);
  const auto back = decode_wav(bytes);
  REQUIRE(back.size() == w.size());
  CHECK(std::memcmp(back.samples.data(), w.samples.data(), w.size() * sizeof(double)) == 0);
  CHECK(encode_wav(back, WavEncoding::kPcm16) == bytes);
}

TEST_CASE("float32 round trip through a file") {
  auto w = Noise(1000, 4);
  for (auto& s : w.samples) s = static_cast<float>(s);
  const auto path = std::filesystem::temp_directory_path() / "artifree_f32_rt.wav";
  write_wav(w, path, WavEncoding::kFloat32);
  const auto back = read_wav(path);
  std::filesystem::remove(path);
  REQUIRE(back.size() == w.size());
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(back.samples[i] == w.samples[i]);
}

TEST_CASE("frame count formula") {
  StftConfig cfg{512, 256, WindowType::kHann};
  CHECK(stft(Waveform{std::vector<double>(1024, 0.1), 16000}, cfg).num_frames == 3);
  CHECK(StftConfig{}.num_frames(16000) == 122);
  CHECK_THROWS_AS(stft(Waveform{std::vector<double>(509, 0.1), 16000}), SizeError);
  CHECK_THROWS_AS((StftConfig{512, 0, WindowType::kHann}.validate()), InputError);
  CHECK_THROWS_AS((StftConfig{512, 513, WindowType::kHann}.validate()), InputError);
}

TEST_CASE("all-zero input gives all-zero magnitudes") {
  const auto m = stft(Waveform{std::vector<double>(2000, 0.0), 16000}).magnitude();
  for (double v : m.data) CHECK(v == 0.0);
}

TEST_CASE("bin-centred sine has one dominant bin per frame") {
  StftConfig cfg{512, 256, WindowType::kHann};
  const int bin = 40;
  const double f = bin * 16000.0 / 512;
  const auto m = stft(synth::tone(f, 4096, 16000), cfg).magnitude();
  for (std::size_t t = 0; t < m.num_frames; ++t) {
    std::size_t arg = 0;
    for (std::size_t k = 1; k < m.num_bins; ++k)
      if (m.at(t, k) > m.at(t, arg)) arg = k;
    CHECK(arg == bin);
    // Hann leaks only into the two neighbours.
    CHECK(m.at(t, bin + 3) < 1e-6 * m.at(t, bin));
  }
}

TEST_CASE("fft matches a direct DFT") {
  const auto w = Noise(510, 9);
  StftConfig cfg{510, 128, WindowType::kRectangular};
  const auto s = stft(w, cfg);
  const auto ref = oracle::dft(w.samples);
  REQUIRE(ref.size() == s.num_bins);
  for (std::size_t k = 0; k < ref.size(); ++k)
    CHECK(std::abs(s.at(0, k) - ref[k]) < 1e-9);
}

TEST_CASE("spectral energy matches windowed-signal energy") {
  for (int n : {512, 510}) {
    StftConfig cfg{n, n / 2, WindowType::kHann};
    const auto w = Noise(16000, 11);
    const auto s = stft(w, cfg);
    const auto win = make_window(WindowType::kHann, n);
    double time_energy = 0.0, spec_energy = 0.0;
    for (std::size_t t = 0; t < s.num_frames; ++t) {
      for (int i = 0; i < n; ++i) {
        const double v = w.samples[t * cfg.hop + i] * win[i];
        time_energy += v * v;
      }
      for (std::size_t k = 0; k < s.num_bins; ++k) {
        // One-sided spectrum: interior bins stand for two.
        const bool edge = k == 0 || (n % 2 == 0 && k == s.num_bins - 1);
        spec_energy += (edge ? 1.0 : 2.0) * std::norm(s.at(t, k));
      }
    }
    spec_energy /= n;
    CHECK(std::abs(spec_energy - time_energy) / time_energy < 0.01);
  }
}

TEST_CASE("periodic hann window") {
  const auto w = make_window(WindowType::kHann, 8);
  CHECK(w[0] == 0.0);
  CHECK(w[4] == doctest::Approx(1.0));
  CHECK(w[2] == doctest::Approx(0.5));
}

TEST_CASE("mix_at_snr definitions") {
  const auto clean = Noise(8000, 1, 0.2);
  auto noise = clean;
  std::reverse(noise.samples.begin(), noise.samples.end());
  // Equal power: gain 1 means noisy - clean == noise segment exactly.
  const auto at0 = mix_at_snr(clean, noise, 0.0, 5);
  for (std::size_t i = 0; i < clean.size(); ++i)
    CHECK(at0.samples[i] - clean.samples[i] == doctest::Approx(noise.samples[i]).epsilon(1e-12));
  const auto at20 = mix_at_snr(clean, Noise(20000, 2), 20.0, 5);
  std::vector<double> resid(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) resid[i] = at20.samples[i] - clean.samples[i];
  CHECK(mean_power(resid) == doctest::Approx(mean_power(clean.samples) / 100.0).epsilon(1e-10));
  CHECK_THROWS_AS(mix_at_snr(Waveform{std::vector<double>(100, 0.0), 16000}, noise, 0, 1),
                  DegenerateSignalError);
  CHECK_THROWS_AS(mix_at_snr(clean, Waveform{std::vector<double>(100, 0.0), 16000}, 0, 1),
                  DegenerateSignalError);
}

TEST_CASE("short noise is tiled with a seeded offset") {
  const auto clean = Noise(5000, 1);
  const auto noise = Noise(777, 2);
  const auto a = mix_at_snr(clean, noise, 3.0, 42);
  const auto b = mix_at_snr(clean, noise, 3.0, 42);
  CHECK(a.samples == b.samples);
  CHECK(estimate_snr(a, clean).db == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("mix then estimate recovers the SNR over [-10, 30] dB") {
  const auto clean = synth::synth_utterance(17, 1.0).wave;
  const auto noise = Noise(30000, 3);
  for (double snr = -10.0; snr <= 30.0; snr += 0.5) {
    const auto est = estimate_snr(mix_at_snr(clean, noise, snr, 9), clean);
    CHECK_FALSE(est.infinite);
    CHECK(est.source == SnrSource::kCleanReference);
    CHECK(std::abs(est.db - snr) < 1e-6);
  }
}

TEST_CASE("noisy equal to clean gives the infinite sentinel") {
  const auto clean = Noise(4000, 1);
  const auto e = estimate_snr(clean, clean);
  CHECK(e.infinite);
  CHECK(std::isinf(e.db));
}

TEST_CASE("blind estimate within 3 dB on stationary noise") {
  // Steady vowel bursts with short pauses, so the percentiles see both the
  // noise floor and a stable speech level.
  const auto& vowel = synth::vowel_inventory()[3];
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Waveform clean;
    clean.samples.assign(32000, 0.0f);
    for (std::size_t start = 1600; start + 6400 <= clean.size(); start += 8000) {
      const auto burst = synth::noise_excited_vowel(vowel.formants, 0.4, 16000, seed * 7 + start);
      std::copy(burst.samples.begin(), burst.samples.end(), clean.samples.begin() + start);
    }
    const auto noise = synth::noise(synth::NoiseColor::kWhite, 32000, 16000, seed);
    const auto est = estimate_snr(mix_at_snr(clean, noise, 5.0, seed));
    CHECK(est.source == SnrSource::kBlind);
    CHECK(std::abs(est.db - 5.0) <= 3.0);
  }
}

TEST_CASE("blind estimate tracks the active speech level") {
  // Pauses and level changes in running speech lift the upper percentile
  // above the long-term mean, so the estimate sits above the mixing SNR.
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto clean = synth::synth_utterance(100 + seed, 2.0).wave;
    const auto noise = synth::noise(synth::NoiseColor::kWhite, 32000, 16000, seed);
    const double bias = estimate_snr(mix_at_snr(clean, noise, 5.0, seed)).db - 5.0;
    CHECK(bias > 0.0);
    CHECK(bias < 6.0);
  }
}

TEST_CASE("waveform validation") {
  CHECK_THROWS_AS(Waveform{}.validate(), InputError);
  CHECK_THROWS_AS((Waveform{{0.0, NAN}, 16000}.validate()), InputError);
  CHECK_THROWS_AS((Waveform{{0.0}, 0}.validate()), InputError);
}

TEST_CASE("percentile interpolates linearly") {
  CHECK(percentile({1, 2, 3, 4, 5}, 50) == 3.0);
  CHECK(percentile({0, 10}, 25) == 2.5);
}

}  // TEST_SUITE

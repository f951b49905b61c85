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

#include "artifree/diffusion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <random>

#include "artifree/error.hpp"
#include "artifree/rng.hpp"
#include "artifree/simd/kernels.hpp"

namespace artifree::diffusion {

void SamplerConfig::validate() const {
  if (n_steps < 1) throw InputError("n_steps must be >= 1");
  if (reference_steps < 1) throw InputError("reference_steps must be >= 1");
  if (!(noise_sigma0 >= 0.0)) throw InputError("noise_sigma0 must be >= 0");
  if (!(decay > 0.0 && decay < 1.0)) throw InputError("decay must be in (0,1)");
  if (!(step_gain > 0.0 && step_gain <= 1.0))
    throw InputError("step_gain must be in (0,1]");
  if (!(halluc_rate >= 0.0 && halluc_rate <= 1.0))
    throw InputError("halluc_rate must be in [0,1]");
  if (halluc_probability &&
      !(*halluc_probability >= 0.0 && *halluc_probability <= 1.0))
    throw InputError("halluc_probability must be in [0,1]");
  if (!(halluc_strength >= 0.0)) throw InputError("halluc_strength must be >= 0");
  stft.validate();
}

double hallucination_probability(const SamplerConfig& cfg, double snr_db) {
  if (cfg.halluc_probability) return *cfg.halluc_probability;
  if (std::isnan(snr_db)) throw InputError("snr_db is NaN");
  return cfg.halluc_rate * std::clamp((10.0 - snr_db) / 20.0, 0.0, 1.0);
}

namespace {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Drawn unconditionally so the noise stream and blob geometry do not depend
// on whether the hallucination fires.
Blob DrawBlob(std::mt19937_64& g, std::size_t frames, std::size_t bins,
              int sample_rate, double amplitude) {
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(g); };
  Blob b;
  const std::size_t dur = std::min<std::size_t>(8 + g() % 13, frames);
  b.frame_begin = frames > dur ? g() % (frames - dur + 1) : 0;
  b.frame_end = b.frame_begin + dur;
  b.center_frame = b.frame_begin + 0.5 * (dur - 1);
  b.sigma_frames = std::max(1.0, dur / 4.0);

  // 3-8 adjacent mel bands (40-band scale) centred at 300-3000 Hz.
  const double band_mel = HzToMel(sample_rate / 2.0) / 41.0;
  const double centre_mel = HzToMel(uni(300.0, 3000.0));
  const double half_width = 0.5 * static_cast<double>(3 + g() % 6) * band_mel;
  const double bin_hz = sample_rate / (2.0 * (bins - 1));
  const double lo_hz = MelToHz(std::max(0.0, centre_mel - half_width));
  const double hi_hz = MelToHz(centre_mel + half_width);
  b.bin_begin = static_cast<std::size_t>(std::floor(lo_hz / bin_hz));
  b.bin_end = std::min(bins, static_cast<std::size_t>(std::ceil(hi_hz / bin_hz)) + 1);
  b.center_bin = MelToHz(centre_mel) / bin_hz;
  b.sigma_bins = std::max(1.0, (b.bin_end - b.bin_begin) / 4.0);
  b.amplitude = amplitude;
  return b;
}

void AddBlob(const Blob& b, std::vector<double>& target, std::size_t bins) {
  for (std::size_t t = b.frame_begin; t < b.frame_end; ++t) {
    const double dt = (t - b.center_frame) / b.sigma_frames;
    for (std::size_t f = b.bin_begin; f < b.bin_end; ++f) {
      const double df = (f - b.center_bin) / b.sigma_bins;
      target[t * bins + f] += b.amplitude * std::exp(-0.5 * (dt * dt + df * df));
    }
  }
}

}  // namespace

PreparedInput prepare_input(const signal::Waveform& noisy,
                            const signal::Waveform& clean_hint,
                            const signal::StftConfig& stft) {
  noisy.validate();
  clean_hint.validate();
  if (noisy.size() != clean_hint.size() ||
      noisy.sample_rate != clean_hint.sample_rate)
    throw IncompatibleError("noisy input and clean hint differ in length or rate");

  PreparedInput in;
  in.length = noisy.size();
  in.sample_rate = noisy.sample_rate;
  in.observed = signal::stft(noisy, stft);
  in.snr = signal::estimate_snr(noisy, clean_hint);
  const auto x_clean = signal::stft(clean_hint, stft);
  const auto& y = in.observed.data;

  // Wiener weights come from the observation, not the iterate: a gain
  // recomputed from x stalls in noise-dominated bins as x shrinks.
  const std::size_t n = y.size();
  in.observed_mag.resize(n);
  in.target.resize(n);
  in.weight.resize(n);
  double sum_power = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double clean_power = std::norm(x_clean.data[i]);
    const double noise_power = std::norm(y[i] - x_clean.data[i]);
    // sqrt(norm) rather than std::abs: components are finite and hypot's
    // overflow care is measurable at this size.
    in.observed_mag[i] = std::sqrt(std::norm(y[i]));
    in.target[i] = std::sqrt(clean_power);
    in.weight[i] = noise_power / (std::norm(y[i]) + noise_power + 1e-20);
    sum_power += clean_power;
  }
  in.floor_level = 1e-3 * std::sqrt(sum_power / static_cast<double>(n));
  in.ref_level = signal::percentile(in.target, 95.0);
  return in;
}

EnhanceResult enhance_detailed(const PreparedInput& in, const SamplerConfig& cfg) {
  cfg.validate();
  const auto& a = in.observed.config;
  if (cfg.stft.window_len != a.window_len || cfg.stft.hop != a.hop ||
      cfg.stft.window != a.window)
    throw IncompatibleError("sampler STFT config does not match the prepared input");

  const auto& y = in.observed.data;
  const std::size_t frames = in.observed.num_frames, bins = in.observed.num_bins;
  const std::size_t n = y.size();

  EnhanceResult out;
  out.input_snr_db = in.snr.db;
  out.halluc_probability = in.snr.infinite && !cfg.halluc_probability
                               ? 0.0
                               : hallucination_probability(cfg, in.snr.db);

  const auto& mag = in.observed_mag;
  std::vector<double> target = in.target, x = mag, perturb(n);

  auto blob_stream = make_stream(cfg.seed, 2);
  auto hazard_stream = make_stream(cfg.seed, 3);
  auto noise_stream = make_stream(cfg.seed, 1);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Blob blob = DrawBlob(blob_stream, frames, bins, in.sample_rate,
                       cfg.halluc_strength * in.ref_level);
  const double p = out.halluc_probability;
  const double hazard =
      p >= 1.0 ? 1.0 : 1.0 - std::pow(1.0 - p, 1.0 / cfg.reference_steps);

  const auto& k = simd::kernels();
  bool injected = false;
  double sigma = cfg.noise_sigma0;
  for (int step = 0; step < cfg.n_steps; ++step) {
    const double u = uniform01(hazard_stream);
    if (!injected && u < hazard) {
      injected = true;
      blob.inject_step = step;
      AddBlob(blob, target, bins);
    }
    for (std::size_t i = 0; i < n; ++i)
      perturb[i] = sigma * gauss(noise_stream) * (target[i] + in.floor_level);
    k.reverse_step_f64(x.data(), target.data(), in.weight.data(),
                       perturb.data(), cfg.step_gain, n);
    sigma *= cfg.decay;
  }
  if (injected) out.blob = blob;

  signal::Spectrogram enhanced{frames, bins, {}, cfg.stft, in.sample_rate};
  enhanced.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    enhanced.data[i] = mag[i] > 0.0 ? y[i] * (x[i] / mag[i])
                                    : std::complex<double>(x[i], 0.0);
  }
  out.wave = signal::istft(enhanced, in.length);
  out.magnitude = signal::MagnitudeSpectrogram{frames, bins, std::move(x),
                                               cfg.stft, in.sample_rate};
  return out;
}

EnhanceResult enhance_detailed(const signal::Waveform& noisy,
                               const signal::Waveform& clean_hint,
                               const SamplerConfig& cfg) {
  cfg.validate();
  return enhance_detailed(prepare_input(noisy, clean_hint, cfg.stft), cfg);
}

signal::Waveform enhance_once(const signal::Waveform& noisy,
                              const signal::Waveform& clean_hint,
                              const SamplerConfig& cfg) {
  return enhance_detailed(noisy, clean_hint, cfg).wave;
}

std::vector<EnhanceResult> enhance_ensemble(const signal::Waveform& noisy,
                                            const signal::Waveform& clean_hint,
                                            const SamplerConfig& cfg,
                                            std::size_t ensemble_size,
                                            int jobs) {
  if (ensemble_size < 1) throw EnsembleSizeError("ensemble size must be >= 1");
  cfg.validate();
  const PreparedInput in = prepare_input(noisy, clean_hint, cfg.stft);
  auto member = [&](std::size_t i) {
    SamplerConfig c = cfg;
    c.seed = cfg.seed + i;
    return enhance_detailed(in, c);
  };
  std::vector<EnhanceResult> out(ensemble_size);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < ensemble_size; ++i) out[i] = member(i);
    return out;
  }
  const std::size_t workers = std::min<std::size_t>(jobs, ensemble_size);
  std::vector<std::future<void>> pending;
  for (std::size_t w = 0; w < workers; ++w) {
    pending.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < ensemble_size; i += workers) out[i] = member(i);
    }));
  }
  for (auto& f : pending) f.get();
  return out;
}

RtfMeasurement measure_rtf(const std::function<void()>& run,
                           double audio_seconds, int n_steps, int repeats) {
  if (!(audio_seconds > 0.0)) throw InputError("audio_seconds must be > 0");
  if (repeats < 1) throw InputError("repeats must be >= 1");
  RtfMeasurement m;
  m.n_steps = n_steps;
  m.audio_seconds = audio_seconds;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    run();
    const std::chrono::duration<double> dt =
        std::chrono::steady_clock::now() - start;
    m.samples.push_back(dt.count() / audio_seconds);
  }
  auto sorted = m.samples;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  m.rtf = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  // Guard the rtf > 0 invariant against a zero-resolution clock.
  m.rtf = std::max(m.rtf, 1e-12);
  m.per_step_rtf = n_steps > 0 ? m.rtf / n_steps : m.rtf;
  return m;
}

}  // namespace artifree::diffusion

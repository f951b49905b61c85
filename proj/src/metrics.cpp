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

#include "artifree/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "artifree/error.hpp"
#include "artifree/simd/kernels.hpp"

namespace artifree::metrics {

// ---------------------------------------------------------------------------
// LSD

double lsd(const signal::MagnitudeSpectrogram& ref,
           const signal::MagnitudeSpectrogram& test) {
  if (ref.num_bins != test.num_bins)
    throw IncompatibleError("spectrogram bin counts differ");
  if (ref.sample_rate != test.sample_rate)
    throw IncompatibleError("spectrogram sample rates differ");
  const std::size_t frames = std::min(ref.num_frames, test.num_frames);
  if (frames == 0) throw SizeError("lsd of empty spectrogram");
  const std::size_t bins = ref.num_bins;

  std::vector<double> a(bins), b(bins);
  double total = 0.0;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t f = 0; f < bins; ++f) {
      a[f] = 20.0 * std::log10(ref.at(t, f) + signal::kLogFloor);
      b[f] = 20.0 * std::log10(test.at(t, f) + signal::kLogFloor);
    }
    total += std::sqrt(simd::sum_sq_diff(a, b) / static_cast<double>(bins));
  }
  return total / static_cast<double>(frames);
}

double lsd(const signal::Waveform& ref, const signal::Waveform& test,
           const signal::StftConfig& cfg) {
  if (ref.sample_rate != test.sample_rate)
    throw IncompatibleError("sample rates differ");
  return lsd(signal::stft(ref, cfg).magnitude(),
             signal::stft(test, cfg).magnitude());
}

// ---------------------------------------------------------------------------
// Embedding cosine distance

double emb_cosine_distance(const emb::EmbeddingSequence& a,
                           const emb::EmbeddingSequence& b, bool mean_remove) {
  a.validate();
  b.validate();
  if (a.dim != b.dim)
    throw IncompatibleError("embedding dimensions differ (" +
                            std::to_string(a.dim) + " vs " +
                            std::to_string(b.dim) + ")");
  const std::size_t frames = std::min(a.num_frames, b.num_frames);
  const double inv_dim = 1.0 / static_cast<double>(a.dim);
  double total = 0.0;
  for (std::size_t t = 0; t < frames; ++t) {
    const auto fa = a.frame(t), fb = b.frame(t);
    const double ma = mean_remove ? simd::sum(fa) * inv_dim : 0.0;
    const double mb = mean_remove ? simd::sum(fb) * inv_dim : 0.0;
    const double ab = simd::centered_dot(fa, ma, fb, mb);
    const double aa = simd::centered_dot(fa, ma, fa, ma);
    const double bb = simd::centered_dot(fb, mb, fb, mb);
    if (aa == 0.0 && bb == 0.0) continue;
    if (aa == 0.0 || bb == 0.0) {
      total += 1.0;
      continue;
    }
    const double cosv = std::clamp(ab / std::sqrt(aa * bb), -1.0, 1.0);
    total += 1.0 - cosv;
  }
  return total / static_cast<double>(frames);
}

// ---------------------------------------------------------------------------
// VAD

std::vector<bool> vad_decisions(const signal::Waveform& w,
                                const VadConfig& cfg) {
  w.validate();
  const auto rms = signal::frame_rms(w, cfg.framing);
  const double threshold = std::max(
      cfg.abs_floor,
      cfg.rel_factor * signal::percentile(rms, cfg.rel_percentile));
  std::vector<bool> active(rms.size(), false);
  int hold = 0;
  for (std::size_t t = 0; t < rms.size(); ++t) {
    if (rms[t] > threshold) {
      active[t] = true;
      hold = cfg.hangover_frames;
    } else if (hold > 0) {
      active[t] = true;
      --hold;
    }
  }
  return active;
}

double vad_mismatch(const signal::Waveform& a, const signal::Waveform& b,
                    const VadConfig& cfg) {
  if (a.sample_rate != b.sample_rate)
    throw IncompatibleError("sample rates differ");
  const auto da = vad_decisions(a, cfg);
  const auto db = vad_decisions(b, cfg);
  const std::size_t frames = std::min(da.size(), db.size());
  std::size_t differ = 0;
  for (std::size_t t = 0; t < frames; ++t) differ += da[t] != db[t];
  return static_cast<double>(differ) * cfg.framing.hop / a.sample_rate;
}

// ---------------------------------------------------------------------------
// Formants

std::vector<double> lpc(std::span<const double> frame, int order) {
  if (order < 1) throw InputError("LPC order must be >= 1");
  if (frame.size() <= static_cast<std::size_t>(order))
    throw SizeError("frame shorter than LPC order");
  std::vector<double> r(order + 1, 0.0);
  for (int k = 0; k <= order; ++k)
    for (std::size_t n = k; n < frame.size(); ++n) r[k] += frame[n] * frame[n - k];

  std::vector<double> a(order + 1, 0.0);
  a[0] = 1.0;
  if (r[0] <= 0.0) return a;
  double err = r[0];
  std::vector<double> prev(order + 1);
  for (int i = 1; i <= order; ++i) {
    double acc = r[i];
    for (int j = 1; j < i; ++j) acc += a[j] * r[i - j];
    const double k = -acc / err;
    prev = a;
    for (int j = 1; j < i; ++j) a[j] = prev[j] + k * prev[i - j];
    a[i] = k;
    err *= (1.0 - k * k);
    if (err <= 0.0) break;
  }
  return a;
}

std::vector<Resonance> lpc_resonances(std::span<const double> a,
                                      int sample_rate,
                                      const FormantConfig& cfg) {
  const int p = static_cast<int>(a.size()) - 1;
  std::vector<Resonance> out;
  if (p < 1) return out;
  // Companion matrix of z^p + a1 z^(p-1) + ... + ap.
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(p, p);
  for (int j = 0; j < p; ++j) companion(0, j) = -a[j + 1] / a[0];
  for (int i = 1; i < p; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) return out;
  const auto roots = solver.eigenvalues();
  for (int i = 0; i < p; ++i) {
    const std::complex<double> z = roots[i];
    const double angle = std::arg(z);
    if (!(angle > 0.0 && angle < std::numbers::pi)) continue;
    const double radius = std::abs(z);
    if (radius <= 0.0) continue;
    Resonance r;
    r.freq_hz = angle * sample_rate / (2.0 * std::numbers::pi);
    r.bandwidth_hz = -(sample_rate / std::numbers::pi) * std::log(radius);
    if (r.freq_hz < cfg.min_freq_hz || r.bandwidth_hz > cfg.max_bandwidth_hz ||
        r.bandwidth_hz <= 0.0)
      continue;
    out.push_back(r);
  }
  std::sort(out.begin(), out.end(), [](const Resonance& x, const Resonance& y) {
    return x.freq_hz < y.freq_hz;
  });
  return out;
}

std::vector<std::vector<Resonance>> formant_tracks(const signal::Waveform& w,
                                                   const FormantConfig& cfg) {
  w.validate();
  const auto& framing = cfg.vad.framing;
  framing.validate();
  const int order = cfg.lpc_order > 0 ? cfg.lpc_order : 2 + w.sample_rate / 1000;
  std::vector<double> emphasized(w.size());
  emphasized[0] = w.samples[0];
  for (std::size_t n = 1; n < w.size(); ++n)
    emphasized[n] = w.samples[n] - cfg.pre_emphasis * w.samples[n - 1];

  const auto win = signal::make_window(cfg.window, framing.window_len);
  const std::size_t frames = framing.num_frames(w.size());
  std::vector<std::vector<Resonance>> tracks(frames);
  std::vector<double> buf(framing.window_len);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* src = emphasized.data() + t * framing.hop;
    for (int i = 0; i < framing.window_len; ++i) buf[i] = src[i] * win[i];
    const auto a = lpc(buf, order);
    auto res = lpc_resonances(a, w.sample_rate, cfg);
    if (res.size() > static_cast<std::size_t>(cfg.num_formants))
      res.resize(cfg.num_formants);
    tracks[t] = std::move(res);
  }
  return tracks;
}

std::optional<double> formant_bandwidth_divergence(const signal::Waveform& a,
                                                   const signal::Waveform& b,
                                                   const FormantConfig& cfg) {
  if (a.sample_rate != b.sample_rate)
    throw IncompatibleError("sample rates differ");
  const auto va = vad_decisions(a, cfg.vad);
  const auto vb = vad_decisions(b, cfg.vad);
  const auto ta = formant_tracks(a, cfg);
  const auto tb = formant_tracks(b, cfg);
  const std::size_t frames = std::min(ta.size(), tb.size());
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t t = 0; t < frames; ++t) {
    if (!va[t] || !vb[t]) continue;
    const std::size_t k = std::min(ta[t].size(), tb[t].size());
    if (k == 0) continue;
    double diff = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      diff += std::abs(ta[t][i].bandwidth_hz - tb[t][i].bandwidth_hz);
    total += diff / static_cast<double>(k);
    ++used;
  }
  if (used == 0) return std::nullopt;
  return total / static_cast<double>(used);
}

}  // namespace artifree::metrics

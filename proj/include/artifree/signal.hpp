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

// Waveforms, WAV I/O, short-time Fourier analysis and SNR utilities.

#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace artifree::signal {

/// Mono audio. Samples are nominally in [-1, 1]; mixing may exceed that
/// range and writers clip.
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  std::size_t size() const { return samples.size(); }
  double duration_seconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  // Throws InputError unless non-empty, finite and sample_rate > 0.
  void validate() const;
};

Waveform make_waveform(std::vector<double> samples, int sample_rate);

enum class WavEncoding { kPcm16, kFloat32 };

// RIFF/WAVE, PCM16 or IEEE float32 (plain or WAVE_FORMAT_EXTENSIBLE).
// Multi-channel files yield channel 0 with a warning on stderr.
Waveform read_wav(const std::filesystem::path& path);
Waveform decode_wav(std::span<const std::uint8_t> bytes);
void write_wav(const Waveform& w, const std::filesystem::path& path,
               WavEncoding encoding = WavEncoding::kPcm16);
std::vector<std::uint8_t> encode_wav(const Waveform& w,
                                     WavEncoding encoding = WavEncoding::kPcm16);

enum class WindowType { kHann, kHamming, kRectangular };

struct StftConfig {
  int window_len = 510;
  int hop = 128;
  WindowType window = WindowType::kHann;

  int num_bins() const { return window_len / 2 + 1; }
  void validate() const;
  // 1 + floor((n - window_len) / hop); 0 when n < window_len.
  std::size_t num_frames(std::size_t n) const;
};

// Periodic taper of length n.
std::vector<double> make_window(WindowType type, int n);

// Magnitude floor used before every logarithm.
inline constexpr double kLogFloor = 1e-10;

/// Row-major T x F magnitudes.
struct MagnitudeSpectrogram {
  std::size_t num_frames = 0;
  std::size_t num_bins = 0;
  std::vector<double> data;
  StftConfig config;
  int sample_rate = 16000;

  double at(std::size_t t, std::size_t f) const {
    return data[t * num_bins + f];
  }
  std::span<const double> frame(std::size_t t) const {
    return {data.data() + t * num_bins, num_bins};
  }
};

/// Row-major T x F complex STFT.
struct Spectrogram {
  std::size_t num_frames = 0;
  std::size_t num_bins = 0;
  std::vector<std::complex<double>> data;
  StftConfig config;
  int sample_rate = 16000;

  std::complex<double> at(std::size_t t, std::size_t f) const {
    return data[t * num_bins + f];
  }
  MagnitudeSpectrogram magnitude() const;
};

// Throws SizeError when the signal is shorter than one window.
Spectrogram stft(const Waveform& w, const StftConfig& cfg = {});

// Weighted overlap-add inverse. Samples not covered by any frame are zero;
// the output has `length` samples.
Waveform istft(const Spectrogram& spec, std::size_t length);

double mean_power(std::span<const double> x);

// Global SNR mixing: clean + g*noise with g chosen so that
// 10*log10(P_clean / P_scaled_noise) == snr_db. Noise longer than the clean
// signal is cropped at a seeded offset; shorter noise is tiled from one.
Waveform mix_at_snr(const Waveform& clean, const Waveform& noise,
                    double snr_db, std::uint64_t seed);

enum class SnrSource { kOracle, kCleanReference, kBlind };
std::string to_string(SnrSource s);

struct SnrEstimate {
  double db = 0.0;
  // Set when the residual (or blind noise floor) has zero power; db is +inf.
  bool infinite = false;
  SnrSource source = SnrSource::kCleanReference;
};

// With a clean reference: exact 10*log10(P_clean / P_(noisy-clean)).
// Without: blind heuristic from frame-RMS percentiles (10th = noise floor,
// 90th = speech+noise level).
SnrEstimate estimate_snr(const Waveform& noisy,
                         const std::optional<Waveform>& clean = std::nullopt,
                         const StftConfig& cfg = {});

// Frame RMS over the STFT framing (no taper).
std::vector<double> frame_rms(const Waveform& w, const StftConfig& cfg);

// Linear-interpolated percentile, p in [0, 100].
double percentile(std::vector<double> values, double p);

}  // namespace artifree::signal

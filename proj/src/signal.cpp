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

#include "artifree/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>

#include "artifree/error.hpp"
#include "artifree/rng.hpp"
#include "fft.hpp"

namespace artifree::signal {

void Waveform::validate() const {
  if (sample_rate <= 0) throw InputError("sample_rate must be positive");
  if (samples.empty()) throw InputError("waveform is empty");
  for (double s : samples)
    if (!std::isfinite(s)) throw InputError("waveform has non-finite samples");
}

Waveform make_waveform(std::vector<double> samples, int sample_rate) {
  Waveform w{std::move(samples), sample_rate};
  w.validate();
  return w;
}

// ---------------------------------------------------------------------------
// WAV

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t ReadU16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
std::uint32_t ReadU32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}
void PutU16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(v & 0xFF);
  out.push_back(v >> 8);
}
void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
}
void PutTag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

Waveform decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError("not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    std::uint64_t size = ReadU32(chunk + 4);
    if (pos + 8 + size > bytes.size())
      throw FormatError("truncated RIFF chunk '" +
                        std::string(reinterpret_cast<const char*>(chunk), 4) +
                        "'");
    const std::uint8_t* body = chunk + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError("fmt chunk too short");
      format = ReadU16(body);
      channels = ReadU16(body + 2);
      rate = ReadU32(body + 4);
      block_align = ReadU16(body + 12);
      bits = ReadU16(body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw FormatError("extensible fmt chunk too short");
        format = ReadU16(body + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = body;
      data_size = size;
    }
    pos += 8 + size + (size & 1);
  }
  if (!have_fmt) throw FormatError("missing fmt chunk");
  if (data == nullptr) throw FormatError("missing data chunk");
  if (channels == 0 || rate == 0) throw FormatError("invalid fmt fields");

  std::size_t sample_bytes = 0;
  if (format == kFormatPcm && bits == 16) {
    sample_bytes = 2;
  } else if (format == kFormatFloat && bits == 32) {
    sample_bytes = 4;
  } else {
    throw UnsupportedError("unsupported WAV encoding (format " +
                           std::to_string(format) + ", " +
                           std::to_string(bits) + " bits)");
  }
  if (block_align != channels * sample_bytes)
    throw FormatError("block_align inconsistent with channels/bits");
  if (channels > 1)
    std::cerr << "warning: " << channels
              << "-channel WAV, using channel 0 only\n";

  const std::size_t frames = data_size / block_align;
  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  w.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const std::uint8_t* p = data + i * block_align;
    if (sample_bytes == 2) {
      auto v = static_cast<std::int16_t>(ReadU16(p));
      w.samples[i] = v / 32768.0;
    } else {
      std::uint32_t u = ReadU32(p);
      float f;
      std::memcpy(&f, &u, sizeof f);
      w.samples[i] = f;
    }
  }
  if (w.samples.empty()) throw FormatError("WAV has no samples");
  for (double s : w.samples)
    if (!std::isfinite(s)) throw FormatError("WAV contains non-finite samples");
  return w;
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(const Waveform& w, WavEncoding encoding) {
  w.validate();
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint16_t block = bits / 8;
  const std::uint64_t data_size = static_cast<std::uint64_t>(block) * w.size();
  if (data_size + 36 > std::numeric_limits<std::uint32_t>::max())
    throw SizeError("waveform too long for a RIFF file");

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  PutTag(out, "RIFF");
  PutU32(out, static_cast<std::uint32_t>(36 + data_size));
  PutTag(out, "WAVE");
  PutTag(out, "fmt ");
  PutU32(out, 16);
  PutU16(out, encoding == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat);
  PutU16(out, 1);
  PutU32(out, static_cast<std::uint32_t>(w.sample_rate));
  PutU32(out, static_cast<std::uint32_t>(w.sample_rate) * block);
  PutU16(out, block);
  PutU16(out, bits);
  PutTag(out, "data");
  PutU32(out, static_cast<std::uint32_t>(data_size));
  for (double s : w.samples) {
    if (encoding == WavEncoding::kPcm16) {
      double scaled = std::nearbyint(s * 32768.0);
      scaled = std::clamp(scaled, -32768.0, 32767.0);
      PutU16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
    } else {
      float f = static_cast<float>(std::clamp(s, -1.0, 1.0));
      std::uint32_t u;
      std::memcpy(&u, &f, sizeof u);
      PutU32(out, u);
    }
  }
  return out;
}

void write_wav(const Waveform& w, const std::filesystem::path& path,
               WavEncoding encoding) {
  auto bytes = encode_wav(w, encoding);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

// ---------------------------------------------------------------------------
// STFT

void StftConfig::validate() const {
  if (window_len < 2) throw InputError("window_len must be >= 2");
  if (hop <= 0 || hop > window_len)
    throw InputError("hop must satisfy 0 < hop <= window_len");
}

std::size_t StftConfig::num_frames(std::size_t n) const {
  const auto w = static_cast<std::size_t>(window_len);
  if (n < w) return 0;
  return 1 + (n - w) / static_cast<std::size_t>(hop);
}

std::vector<double> make_window(WindowType type, int n) {
  std::vector<double> w(n, 1.0);
  const double step = 2.0 * std::numbers::pi / n;
  for (int i = 0; i < n; ++i) {
    switch (type) {
      case WindowType::kHann:
        w[i] = 0.5 - 0.5 * std::cos(step * i);
        break;
      case WindowType::kHamming:
        w[i] = 0.54 - 0.46 * std::cos(step * i);
        break;
      case WindowType::kRectangular:
        break;
    }
  }
  return w;
}

MagnitudeSpectrogram Spectrogram::magnitude() const {
  MagnitudeSpectrogram m{num_frames, num_bins, {}, config, sample_rate};
  m.data.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) m.data[i] = std::abs(data[i]);
  return m;
}

Spectrogram stft(const Waveform& w, const StftConfig& cfg) {
  cfg.validate();
  const std::size_t frames = cfg.num_frames(w.size());
  if (frames == 0)
    throw SizeError("signal of " + std::to_string(w.size()) +
                    " samples is shorter than one window (" +
                    std::to_string(cfg.window_len) + ")");
  const auto win = make_window(cfg.window, cfg.window_len);
  const std::size_t bins = static_cast<std::size_t>(cfg.num_bins());

  Spectrogram s{frames, bins, {}, cfg, w.sample_rate};
  s.data.resize(frames * bins);
  std::vector<double> buf(cfg.window_len);
  for (std::size_t t = 0; t < frames; ++t) {
    const double* src = w.samples.data() + t * cfg.hop;
    for (int i = 0; i < cfg.window_len; ++i) buf[i] = src[i] * win[i];
    detail::real_fft(buf, std::span(s.data.data() + t * bins, bins));
  }
  return s;
}

Waveform istft(const Spectrogram& spec, std::size_t length) {
  const auto& cfg = spec.config;
  cfg.validate();
  const auto win = make_window(cfg.window, cfg.window_len);
  const std::size_t wlen = win.size();
  std::vector<double> scaled(wlen), win_sq(wlen);
  for (std::size_t i = 0; i < wlen; ++i) {
    scaled[i] = win[i] / cfg.window_len;
    win_sq[i] = win[i] * win[i];
  }
  std::vector<double> out(length, 0.0), norm(length, 0.0);
  std::vector<double> frame(wlen);
  for (std::size_t t = 0; t < spec.num_frames; ++t) {
    detail::inverse_real_fft(
        std::span(spec.data.data() + t * spec.num_bins, spec.num_bins), frame);
    const std::size_t start = t * cfg.hop;
    if (start >= length) break;
    const std::size_t m = std::min(wlen, length - start);
    double* o = out.data() + start;
    double* q = norm.data() + start;
    for (std::size_t i = 0; i < m; ++i) {
      o[i] += frame[i] * scaled[i];
      q[i] += win_sq[i];
    }
  }
  for (std::size_t i = 0; i < length; ++i)
    out[i] = norm[i] > 1e-8 ? out[i] / norm[i] : 0.0;
  return Waveform{std::move(out), spec.sample_rate};
}

// ---------------------------------------------------------------------------
// SNR

double mean_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double s = 0.0;
  for (double v : x) s += v * v;
  return s / static_cast<double>(x.size());
}

Waveform mix_at_snr(const Waveform& clean, const Waveform& noise,
                    double snr_db, std::uint64_t seed) {
  clean.validate();
  noise.validate();
  if (!std::isfinite(snr_db)) throw InputError("snr_db must be finite");
  if (clean.sample_rate != noise.sample_rate)
    throw IncompatibleError("clean and noise sample rates differ");

  const std::size_t n = clean.size();
  std::vector<double> segment(n);
  auto gen = make_stream(seed, 0);
  if (noise.size() >= n) {
    const std::size_t offset = gen() % (noise.size() - n + 1);
    std::copy_n(noise.samples.begin() + offset, n, segment.begin());
  } else {
    std::size_t pos = gen() % noise.size();
    for (std::size_t i = 0; i < n; ++i) {
      segment[i] = noise.samples[pos];
      pos = (pos + 1) % noise.size();
    }
  }

  const double pc = mean_power(clean.samples);
  const double pn = mean_power(segment);
  if (pc <= 0.0) throw DegenerateSignalError("clean signal has zero power");
  if (pn <= 0.0) throw DegenerateSignalError("noise signal has zero power");
  const double gain = std::sqrt(pc / (pn * std::pow(10.0, snr_db / 10.0)));

  Waveform out{std::vector<double>(n), clean.sample_rate};
  for (std::size_t i = 0; i < n; ++i)
    out.samples[i] = clean.samples[i] + gain * segment[i];
  return out;
}

std::string to_string(SnrSource s) {
  switch (s) {
    case SnrSource::kOracle:
      return "oracle";
    case SnrSource::kCleanReference:
      return "clean-reference";
    case SnrSource::kBlind:
      return "blind";
  }
  return "unknown";
}

std::vector<double> frame_rms(const Waveform& w, const StftConfig& cfg) {
  cfg.validate();
  const std::size_t frames = cfg.num_frames(w.size());
  if (frames == 0) throw SizeError("signal shorter than one analysis frame");
  std::vector<double> rms(frames);
  for (std::size_t t = 0; t < frames; ++t)
    rms[t] = std::sqrt(mean_power(
        std::span(w.samples.data() + t * cfg.hop, cfg.window_len)));
  return rms;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw SizeError("percentile of empty set");
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * (values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  std::nth_element(values.begin(), values.begin() + lo, values.end());
  const double v_lo = values[lo];
  if (lo + 1 >= values.size()) return v_lo;
  // The next order statistic is the minimum of the upper partition.
  const double v_hi = *std::min_element(values.begin() + lo + 1, values.end());
  return v_lo + (pos - lo) * (v_hi - v_lo);
}

SnrEstimate estimate_snr(const Waveform& noisy,
                         const std::optional<Waveform>& clean,
                         const StftConfig& cfg) {
  noisy.validate();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (clean) {
    clean->validate();
    if (clean->size() != noisy.size() ||
        clean->sample_rate != noisy.sample_rate)
      throw IncompatibleError("noisy and clean differ in length or rate");
    double pc = 0.0, pr = 0.0;
    for (std::size_t i = 0; i < noisy.size(); ++i) {
      const double r = noisy.samples[i] - clean->samples[i];
      pc += clean->samples[i] * clean->samples[i];
      pr += r * r;
    }
    if (pc <= 0.0) throw DegenerateSignalError("clean signal has zero power");
    if (pr <= 0.0) return {kInf, true, SnrSource::kCleanReference};
    return {10.0 * std::log10(pc / pr), false, SnrSource::kCleanReference};
  }

  const auto rms = frame_rms(noisy, cfg);
  const double floor_level = percentile(rms, 10.0);
  const double level = percentile(rms, 90.0);
  if (floor_level <= 0.0) return {kInf, true, SnrSource::kBlind};
  const double pn = floor_level * floor_level;
  const double ps = std::max(level * level - pn, pn * 1e-3);
  return {10.0 * std::log10(ps / pn), false, SnrSource::kBlind};
}

}  // namespace artifree::signal

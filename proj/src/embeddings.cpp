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

#include "artifree/embeddings.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include "artifree/error.hpp"

namespace artifree::emb {

void EmbeddingSequence::validate() const {
  if (num_frames == 0 || dim == 0)
    throw InputError("embedding sequence must have T >= 1 and D >= 1");
  if (data.size() != num_frames * dim)
    throw InputError("embedding data size does not match T*D");
  if (!(frame_hop_ms > 0.0f) || !std::isfinite(frame_hop_ms))
    throw InputError("frame_hop_ms must be positive");
  for (float v : data)
    if (!std::isfinite(v)) throw InputError("embedding has non-finite entries");
}

EmbeddingSequence make_sequence(std::size_t num_frames, std::size_t dim,
                                std::vector<float> data, float frame_hop_ms,
                                std::string source_tag) {
  EmbeddingSequence s{num_frames, dim, std::move(data), frame_hop_ms,
                      std::move(source_tag)};
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Reference encoder

namespace {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

}  // namespace

std::vector<double> mel_filterbank(int num_mel, int num_bins, int sample_rate,
                                   double fmin_hz, double fmax_hz) {
  if (num_mel < 1 || num_bins < 2) throw InputError("invalid filterbank size");
  if (fmax_hz <= 0.0) fmax_hz = sample_rate / 2.0;
  if (!(fmin_hz >= 0.0 && fmin_hz < fmax_hz))
    throw InputError("filterbank requires 0 <= fmin < fmax");
  const double mlo = HzToMel(fmin_hz), mhi = HzToMel(fmax_hz);
  std::vector<double> edges(num_mel + 2);
  for (int i = 0; i < num_mel + 2; ++i)
    edges[i] = MelToHz(mlo + (mhi - mlo) * i / (num_mel + 1));
  const double bin_hz = sample_rate / (2.0 * (num_bins - 1));
  std::vector<double> fb(static_cast<std::size_t>(num_mel) * num_bins, 0.0);
  for (int m = 0; m < num_mel; ++m) {
    const double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
    for (int k = 0; k < num_bins; ++k) {
      const double f = k * bin_hz;
      double w = 0.0;
      if (f > lo && f <= mid)
        w = (f - lo) / (mid - lo);
      else if (f > mid && f < hi)
        w = (hi - f) / (hi - mid);
      fb[static_cast<std::size_t>(m) * num_bins + k] = w;
    }
  }
  return fb;
}

const std::vector<double>& cosine_projection(int n) {
  static std::mutex mu;
  static std::map<int, std::vector<double>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // Orthonormal DCT-II, rows are basis vectors.
  std::vector<double> c(static_cast<std::size_t>(n) * n);
  for (int k = 0; k < n; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    for (int i = 0; i < n; ++i)
      c[k * n + i] =
          scale * std::cos(std::numbers::pi * (i + 0.5) * k / n);
  }
  // Householder reflection H = I - 2 v v^T / (v^T v) with v = e0 - u maps e0
  // onto u = 1/sqrt(n); Q = H * C then sends the ones vector to itself.
  std::vector<double> v(n, -1.0 / std::sqrt(static_cast<double>(n)));
  v[0] += 1.0;
  double vv = 0.0;
  for (double x : v) vv += x * x;
  std::vector<double> q(c.size());
  if (vv < 1e-24) {
    q = c;
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        // (H C)[i][j] = C[i][j] - 2 v_i (v^T C[:, j]) / vv
        double vc = 0.0;
        for (int k = 0; k < n; ++k) vc += v[k] * c[k * n + j];
        q[i * n + j] = c[i * n + j] - 2.0 * v[i] * vc / vv;
      }
    }
  }
  return cache.emplace(n, std::move(q)).first->second;
}

EmbeddingSequence reference_encode(const signal::Waveform& w,
                                   const EncoderConfig& cfg) {
  w.validate();
  const auto spec = signal::stft(w, cfg.stft);
  const int bins = static_cast<int>(spec.num_bins);
  const auto fb = mel_filterbank(cfg.num_mel, bins, w.sample_rate, cfg.fmin_hz,
                                 cfg.fmax_hz);
  const auto& q = cosine_projection(cfg.num_mel);
  const std::size_t m = static_cast<std::size_t>(cfg.num_mel);

  EmbeddingSequence out;
  out.num_frames = spec.num_frames;
  out.dim = m;
  out.frame_hop_ms = static_cast<float>(1000.0 * cfg.stft.hop / w.sample_rate);
  out.source_tag = "builtin";
  out.data.resize(out.num_frames * m);

  std::vector<double> power(bins), logmel(out.num_frames * m);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < spec.num_frames; ++t) {
    for (int k = 0; k < bins; ++k) power[k] = std::norm(spec.at(t, k));
    for (std::size_t b = 0; b < m; ++b) {
      double e = 0.0;
      const double* row = fb.data() + b * bins;
      for (int k = 0; k < bins; ++k) e += row[k] * power[k];
      logmel[t * m + b] = std::log(e + signal::kLogFloor);
      peak = std::max(peak, logmel[t * m + b]);
    }
  }
  // The clamp moves with the peak, so a gain change stays a uniform shift.
  if (cfg.top_db > 0.0) {
    const double lo = peak - cfg.top_db * std::log(10.0) / 10.0;
    for (auto& v : logmel) v = std::max(v, lo);
  }
  for (std::size_t t = 0; t < spec.num_frames; ++t) {
    const double* frame = logmel.data() + t * m;
    for (std::size_t i = 0; i < m; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += q[i * m + j] * frame[j];
      out.data[t * m + i] = static_cast<float>(acc);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// EMB1

namespace {

void PutBytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
  // Little-endian host assumed; asserted at build time below.
  const auto* b = static_cast<const std::uint8_t*>(p);
  out.insert(out.end(), b, b + n);
}
static_assert(std::endian::native == std::endian::little,
              "EMB1 codec assumes a little-endian host");

template <typename T>
T Load(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_emb(const EmbeddingSequence& seq) {
  seq.validate();
  if (seq.num_frames > std::numeric_limits<std::uint32_t>::max() ||
      seq.dim > std::numeric_limits<std::uint32_t>::max())
    throw SizeError("embedding too large for EMB1");
  std::vector<std::uint8_t> out;
  out.reserve(kEmb1HeaderBytes + 4 * seq.data.size());
  out.insert(out.end(), {'E', 'M', 'B', '1'});
  const std::uint16_t version = 1;
  const auto t = static_cast<std::uint32_t>(seq.num_frames);
  const auto d = static_cast<std::uint32_t>(seq.dim);
  const float hop = seq.frame_hop_ms;
  PutBytes(out, &version, 2);
  PutBytes(out, &t, 4);
  PutBytes(out, &d, 4);
  PutBytes(out, &hop, 4);
  PutBytes(out, seq.data.data(), 4 * seq.data.size());
  return out;
}

EmbeddingSequence decode_emb(std::span<const std::uint8_t> bytes,
                             std::string source_tag) {
  if (bytes.size() < kEmb1HeaderBytes) throw FormatError("EMB1 header truncated");
  if (std::memcmp(bytes.data(), "EMB1", 4) != 0)
    throw FormatError("bad EMB1 magic");
  const auto version = Load<std::uint16_t>(bytes.data() + 4);
  if (version != 1)
    throw FormatError("unsupported EMB1 version " + std::to_string(version));
  const std::uint64_t t = Load<std::uint32_t>(bytes.data() + 6);
  const std::uint64_t d = Load<std::uint32_t>(bytes.data() + 10);
  const float hop = Load<float>(bytes.data() + 14);
  if (t == 0 || d == 0) throw FormatError("EMB1 declares T or D of zero");
  // t, d < 2^32 so t*d < 2^64; the byte count needs its own check.
  const std::uint64_t count = t * d;
  if (count > (std::numeric_limits<std::uint64_t>::max() - kEmb1HeaderBytes) / 4)
    throw FormatError("EMB1 T*D overflows");
  const std::uint64_t payload = bytes.size() - kEmb1HeaderBytes;
  if (count * 4 > payload) throw FormatError("EMB1 payload truncated");
  if (count * 4 < payload) throw FormatError("EMB1 has trailing bytes");
  if (!(hop > 0.0f) || !std::isfinite(hop))
    throw FormatError("EMB1 frame_hop_ms must be positive");

  EmbeddingSequence s;
  s.num_frames = t;
  s.dim = d;
  s.frame_hop_ms = hop;
  s.source_tag = std::move(source_tag);
  s.data.resize(count);
  std::memcpy(s.data.data(), bytes.data() + kEmb1HeaderBytes, count * 4);
  for (float v : s.data)
    if (!std::isfinite(v)) throw FormatError("EMB1 payload has non-finite values");
  return s;
}

EmbeddingSequence read_emb(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_emb(bytes, "external:" + path.stem().string());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_emb(const EmbeddingSequence& seq, const std::filesystem::path& path) {
  const auto bytes = encode_emb(seq);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

// ---------------------------------------------------------------------------

std::vector<EmbeddingSequence> align(std::vector<EmbeddingSequence> seqs) {
  if (seqs.empty()) throw SizeError("align needs at least one sequence");
  std::size_t t_min = seqs.front().num_frames;
  for (const auto& s : seqs) {
    s.validate();
    if (s.dim != seqs.front().dim)
      throw IncompatibleError("embedding dimensions differ (" +
                              std::to_string(seqs.front().dim) + " vs " +
                              std::to_string(s.dim) + ")");
    if (s.frame_hop_ms != seqs.front().frame_hop_ms)
      throw IncompatibleError("embedding frame hops differ");
    t_min = std::min(t_min, s.num_frames);
  }
  for (auto& s : seqs) {
    s.num_frames = t_min;
    s.data.resize(t_min * s.dim);
  }
  return seqs;
}

std::vector<double> pool_mean(const EmbeddingSequence& seq) {
  seq.validate();
  std::vector<double> mean(seq.dim, 0.0);
  for (std::size_t t = 0; t < seq.num_frames; ++t)
    for (std::size_t d = 0; d < seq.dim; ++d) mean[d] += seq.at(t, d);
  for (auto& v : mean) v /= static_cast<double>(seq.num_frames);
  return mean;
}

}  // namespace artifree::emb

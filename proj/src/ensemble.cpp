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

#include "artifree/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "artifree/error.hpp"
#include "artifree/simd/kernels.hpp"

namespace artifree::ensemble {

SimilarityMethod parse_method(const std::string& s) {
  if (s == "flatten-pearson") return SimilarityMethod::kFlattenPearson;
  if (s == "mean-frame-cosine") return SimilarityMethod::kMeanFrameCosine;
  throw InputError("unknown similarity method '" + s + "'");
}

std::string to_string(SimilarityMethod m) {
  return m == SimilarityMethod::kFlattenPearson ? "flatten-pearson"
                                                : "mean-frame-cosine";
}

Heuristic parse_heuristic(const std::string& s) {
  if (s == "centrality") return Heuristic::kCentrality;
  if (s == "clean") return Heuristic::kClean;
  if (s == "noisy") return Heuristic::kNoisy;
  throw InputError("unknown heuristic '" + s + "'");
}

std::string to_string(Heuristic h) {
  switch (h) {
    case Heuristic::kCentrality:
      return "centrality";
    case Heuristic::kClean:
      return "clean";
    case Heuristic::kNoisy:
      return "noisy";
  }
  return "unknown";
}

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// First-moment statistics of a sequence truncated to `frames`.
struct Moments {
  double mean = 0.0;
  double css = 0.0;  // centered sum of squares
};

Moments FlatMoments(const emb::EmbeddingSequence& e, std::size_t frames) {
  std::span<const float> flat(e.data.data(), frames * e.dim);
  Moments m;
  m.mean = simd::sum(flat) / static_cast<double>(flat.size());
  m.css = simd::centered_dot(flat, m.mean, flat, m.mean);
  return m;
}

std::optional<double> PearsonFlat(const emb::EmbeddingSequence& a,
                                  const Moments& ma,
                                  const emb::EmbeddingSequence& b,
                                  const Moments& mb, std::size_t frames) {
  if (ma.css <= 0.0 || mb.css <= 0.0) return std::nullopt;
  std::span<const float> fa(a.data.data(), frames * a.dim);
  std::span<const float> fb(b.data.data(), frames * b.dim);
  const double cov = simd::centered_dot(fa, ma.mean, fb, mb.mean);
  return std::clamp(cov / std::sqrt(ma.css * mb.css), -1.0, 1.0);
}

double MeanFrameCosine(const emb::EmbeddingSequence& a,
                       const emb::EmbeddingSequence& b, std::size_t frames) {
  double total = 0.0;
  for (std::size_t t = 0; t < frames; ++t) {
    const auto fa = a.frame(t), fb = b.frame(t);
    const double aa = simd::dot(fa, fa), bb = simd::dot(fb, fb);
    if (aa == 0.0 && bb == 0.0) {
      total += 1.0;
    } else if (aa > 0.0 && bb > 0.0) {
      total += std::clamp(simd::dot(fa, fb) / std::sqrt(aa * bb), -1.0, 1.0);
    }
  }
  return total / static_cast<double>(frames);
}

void CheckCompatible(const emb::EmbeddingSequence& a,
                     const emb::EmbeddingSequence& b) {
  if (a.dim != b.dim)
    throw IncompatibleError("embedding dimensions differ (" +
                            std::to_string(a.dim) + " vs " +
                            std::to_string(b.dim) + ")");
  if (a.frame_hop_ms != b.frame_hop_ms)
    throw IncompatibleError("embedding frame hops differ");
}

std::size_t ArgmaxLowestIndex(const std::vector<std::optional<double>>& scores) {
  std::size_t best = scores.size();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!scores[i]) continue;
    if (best == scores.size() || *scores[i] > *scores[best]) best = i;
  }
  if (best == scores.size())
    throw SelectionError("no candidate has a defined selection score");
  return best;
}

}  // namespace

std::optional<double> similarity(const emb::EmbeddingSequence& a,
                                 const emb::EmbeddingSequence& b,
                                 SimilarityMethod method) {
  a.validate();
  b.validate();
  CheckCompatible(a, b);
  const std::size_t frames = std::min(a.num_frames, b.num_frames);
  if (method == SimilarityMethod::kMeanFrameCosine)
    return MeanFrameCosine(a, b, frames);
  return PearsonFlat(a, FlatMoments(a, frames), b, FlatMoments(b, frames),
                     frames);
}

SimilarityMatrix similarity_matrix(
    std::span<const emb::EmbeddingSequence> ensemble, SimilarityMethod method) {
  const std::size_t s = ensemble.size();
  if (s < 2)
    throw EnsembleSizeError("similarity matrix needs at least 2 candidates");
  std::size_t frames = ensemble[0].num_frames;
  for (const auto& e : ensemble) {
    e.validate();
    CheckCompatible(ensemble[0], e);
    frames = std::min(frames, e.num_frames);
  }

  SimilarityMatrix m;
  m.size = s;
  m.method = method;
  m.c.assign(s * s, kNan);
  m.defined.assign(s, true);

  std::vector<Moments> moments(s);
  if (method == SimilarityMethod::kFlattenPearson) {
    for (std::size_t i = 0; i < s; ++i) {
      moments[i] = FlatMoments(ensemble[i], frames);
      m.defined[i] = moments[i].css > 0.0;
    }
  }
  for (std::size_t i = 0; i < s; ++i) {
    if (!m.defined[i]) continue;
    m.c[i * s + i] = 1.0;
    for (std::size_t j = i + 1; j < s; ++j) {
      if (!m.defined[j]) continue;
      double v = method == SimilarityMethod::kFlattenPearson
                     ? *PearsonFlat(ensemble[i], moments[i], ensemble[j],
                                    moments[j], frames)
                     : MeanFrameCosine(ensemble[i], ensemble[j], frames);
      m.c[i * s + j] = v;
      m.c[j * s + i] = v;
    }
  }
  return m;
}

SelectionResult select_centrality(const SimilarityMatrix& c) {
  SelectionResult r;
  r.heuristic = Heuristic::kCentrality;
  r.scores.resize(c.size);
  for (std::size_t i = 0; i < c.size; ++i) {
    if (!c.defined[i]) continue;
    double total = 0.0;
    std::size_t n = 0;
    for (std::size_t j = 0; j < c.size; ++j) {
      if (j == i || !c.defined[j]) continue;
      total += c.at(i, j);
      ++n;
    }
    if (n > 0) r.scores[i] = total / static_cast<double>(n);
  }
  r.chosen = ArgmaxLowestIndex(r.scores);
  return r;
}

SelectionResult select_by_reference(
    std::span<const emb::EmbeddingSequence> ensemble,
    const emb::EmbeddingSequence& reference, Heuristic label,
    SimilarityMethod method) {
  if (ensemble.empty()) throw EnsembleSizeError("no candidates to select from");
  if (label == Heuristic::kCentrality)
    throw InputError("reference selection must be labeled clean or noisy");
  SelectionResult r;
  r.heuristic = label;
  r.scores.reserve(ensemble.size());
  for (const auto& e : ensemble)
    r.scores.push_back(similarity(e, reference, method));
  r.chosen = ArgmaxLowestIndex(r.scores);
  return r;
}

}  // namespace artifree::ensemble

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

// Semantic-consistency selection among S candidate enhancements.
//
// Candidates are compared through their embedding sequences only; the
// chosen waveform is looked up by index by the caller.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "artifree/embeddings.hpp"

namespace artifree::ensemble {

enum class SimilarityMethod {
  // Pearson correlation of the T*D-flattened sequences.
  kFlattenPearson,
  // Mean over frames of the frame-wise cosine similarity.
  kMeanFrameCosine,
};
SimilarityMethod parse_method(const std::string& s);
std::string to_string(SimilarityMethod m);

enum class Heuristic { kCentrality, kClean, kNoisy };
Heuristic parse_heuristic(const std::string& s);
std::string to_string(Heuristic h);

// Similarity of two sequences over their common first min(T) frames.
// nullopt when flatten-pearson meets a zero-variance sequence.
std::optional<double> similarity(const emb::EmbeddingSequence& a,
                                 const emb::EmbeddingSequence& b,
                                 SimilarityMethod method);

struct SimilarityMatrix {
  std::size_t size = 0;
  SimilarityMethod method = SimilarityMethod::kFlattenPearson;
  std::vector<double> c;       // row-major; NaN where undefined
  std::vector<bool> defined;   // per candidate

  double at(std::size_t i, std::size_t j) const { return c[i * size + j]; }
};

// Symmetric with unit diagonal on defined candidates. Rows and columns of
// undefined candidates are NaN. Throws EnsembleSizeError for S < 2.
SimilarityMatrix similarity_matrix(std::span<const emb::EmbeddingSequence> ensemble,
                                   SimilarityMethod method =
                                       SimilarityMethod::kFlattenPearson);

struct SelectionResult {
  std::size_t chosen = 0;
  Heuristic heuristic = Heuristic::kCentrality;
  std::vector<std::optional<double>> scores;
};

// score_i = mean of C[i, j] over defined j != i. Lowest index wins ties.
SelectionResult select_centrality(const SimilarityMatrix& c);

// score_i = similarity(e_i, reference). `label` records whether the
// reference is the clean or the noisy signal.
SelectionResult select_by_reference(
    std::span<const emb::EmbeddingSequence> ensemble,
    const emb::EmbeddingSequence& reference, Heuristic label,
    SimilarityMethod method = SimilarityMethod::kFlattenPearson);

}  // namespace artifree::ensemble

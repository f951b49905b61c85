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

// Ensemble embedding-variance artifact detection.
//
// Given S embedding sequences of independently sampled enhancements of one
// input, the per-frame variance curve v(t) is the mean over dimensions of
// the population variance across members; the artifact score is its mean
// over frames, and an utterance is flagged when the score strictly exceeds
// the threshold tau.

#pragma once

#include <span>
#include <vector>

#include "artifree/embeddings.hpp"

namespace artifree::artifact {

struct ArtifactReport {
  std::vector<double> v;  // per-frame variance, length T_min
  double a = 0.0;         // mean of v
  double tau = 0.0;
  bool flag = false;      // a > tau
  std::size_t ensemble_size = 0;
};

// Members are compared over their first T_min frames. Throws
// EnsembleSizeError for S < 2 and IncompatibleError on D/hop mismatch.
std::vector<double> frame_variance(std::span<const emb::EmbeddingSequence> ensemble);

// Arithmetic mean; SizeError on an empty curve.
double artifact_score(std::span<const double> v);

ArtifactReport predict(std::span<const emb::EmbeddingSequence> ensemble,
                       double tau);

struct ScoredExample {
  double score = 0.0;
  bool artifact = false;
};

// (TPR + TNR) / 2 with flag = score > tau.
double balanced_accuracy(std::span<const ScoredExample> examples, double tau);

struct Calibration {
  double tau = 0.0;
  double balanced_accuracy = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

// Searches the midpoints between adjacent distinct sorted scores plus the
// largest score (flags nothing) and returns the threshold with the highest
// balanced accuracy, the smallest such threshold on ties. Throws
// CalibrationError unless both classes are present.
Calibration calibrate_threshold(std::span<const ScoredExample> examples);

}  // namespace artifree::artifact

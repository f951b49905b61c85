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

#include "artifree/artifact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "artifree/error.hpp"
#include "artifree/simd/kernels.hpp"

namespace artifree::artifact {

std::vector<double> frame_variance(
    std::span<const emb::EmbeddingSequence> ensemble) {
  const std::size_t s = ensemble.size();
  if (s < 2)
    throw EnsembleSizeError("frame variance needs at least 2 members, got " +
                            std::to_string(s));
  const std::size_t dim = ensemble[0].dim;
  std::size_t frames = ensemble[0].num_frames;
  for (const auto& e : ensemble) {
    e.validate();
    if (e.dim != dim) throw IncompatibleError("ensemble dimensions differ");
    if (e.frame_hop_ms != ensemble[0].frame_hop_ms)
      throw IncompatibleError("ensemble frame hops differ");
    frames = std::min(frames, e.num_frames);
  }

  const auto& k = simd::kernels();
  const double inv_s = 1.0 / static_cast<double>(s);
  const double inv_sd = inv_s / static_cast<double>(dim);
  std::vector<double> v(frames);
  std::vector<double> mean(dim), sq(dim);
  for (std::size_t t = 0; t < frames; ++t) {
    std::fill(mean.begin(), mean.end(), 0.0);
    std::fill(sq.begin(), sq.end(), 0.0);
    for (const auto& e : ensemble)
      k.accumulate_f32(mean.data(), e.frame(t).data(), dim);
    for (auto& m : mean) m *= inv_s;
    for (const auto& e : ensemble)
      k.accumulate_sq_dev_f32(sq.data(), e.frame(t).data(), mean.data(), dim);
    double total = 0.0;
    for (double x : sq) total += x;
    v[t] = total * inv_sd;
  }
  return v;
}

double artifact_score(std::span<const double> v) {
  if (v.empty()) throw SizeError("artifact score of an empty variance curve");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

ArtifactReport predict(std::span<const emb::EmbeddingSequence> ensemble,
                       double tau) {
  if (!std::isfinite(tau)) throw InputError("tau must be finite");
  ArtifactReport r;
  r.v = frame_variance(ensemble);
  r.a = artifact_score(r.v);
  r.tau = tau;
  r.flag = r.a > tau;
  r.ensemble_size = ensemble.size();
  return r;
}

double balanced_accuracy(std::span<const ScoredExample> examples, double tau) {
  std::size_t tp = 0, tn = 0, pos = 0, neg = 0;
  for (const auto& e : examples) {
    const bool flag = e.score > tau;
    if (e.artifact) {
      ++pos;
      tp += flag;
    } else {
      ++neg;
      tn += !flag;
    }
  }
  if (pos == 0 || neg == 0)
    throw CalibrationError("balanced accuracy needs both classes");
  return 0.5 * (static_cast<double>(tp) / pos + static_cast<double>(tn) / neg);
}

Calibration calibrate_threshold(std::span<const ScoredExample> examples) {
  std::vector<ScoredExample> sorted(examples.begin(), examples.end());
  for (const auto& e : sorted)
    if (!std::isfinite(e.score))
      throw CalibrationError("non-finite artifact score");
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredExample& a, const ScoredExample& b) {
              return a.score < b.score;
            });
  std::size_t pos = 0, neg = 0;
  for (const auto& e : sorted) (e.artifact ? pos : neg)++;
  if (pos == 0 || neg == 0)
    throw CalibrationError("calibration needs both artifact and clean examples");

  // Sweep thresholds upward. Below the first score everything is flagged;
  // after passing a group of equal scores those examples are unflagged.
  std::size_t tp = pos, fp = neg;
  Calibration best;
  best.positives = pos;
  best.negatives = neg;
  best.balanced_accuracy = -1.0;
  auto consider = [&](double tau) {
    const double ba = 0.5 * (static_cast<double>(tp) / pos +
                             static_cast<double>(neg - fp) / neg);
    if (ba > best.balanced_accuracy) {
      best.balanced_accuracy = ba;
      best.tau = tau;
    }
  };
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].score == sorted[i].score) {
      (sorted[j].artifact ? tp : fp)--;
      ++j;
    }
    if (j < sorted.size())
      consider(0.5 * (sorted[i].score + sorted[j].score));
    else
      consider(sorted[i].score);
    i = j;
  }
  return best;
}

}  // namespace artifree::artifact

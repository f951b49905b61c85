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

// SNR-banded choice of the number of reverse steps, the N sweep, and the
// comparison of schedules by RTF and quality proxies.

#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "artifree/diffusion.hpp"
#include "artifree/embeddings.hpp"
#include "artifree/signal.hpp"

namespace artifree::sched {

// Bands are (-inf, e0], (e0, e1], (e1, e2], (e2, +inf): very low, low, mid,
// high.
struct SnrBands {
  std::array<double, 3> upper_edges{3.0, 8.0, 13.0};
};
inline constexpr std::size_t kNumBands = 4;

std::size_t band_of_snr(double snr_db, const SnrBands& bands = {});
std::string band_name(std::size_t band);

struct NSchedule {
  std::array<int, kNumBands> n_per_band{30, 30, 30, 30};

  static NSchedule fixed(int n);
  // "20,30,20,10", "[20,30,20,10]" or a single "30" for a fixed schedule.
  static NSchedule parse(const std::string& text);
  bool is_fixed() const;
  // "Fixed N=30" or "[20,30,20,10]".
  std::string label() const;
  void validate() const;
};

int n_for_input(double snr_db, const NSchedule& schedule,
                const SnrBands& bands = {});

struct DatasetItem {
  std::string id;
  signal::Waveform clean;
  signal::Waveform noisy;
  double snr_db = 0.0;
  signal::SnrSource snr_source = signal::SnrSource::kOracle;
};

// Resolves an utterance SNR: supplied value > clean-based estimate > blind
// estimate.
std::pair<double, signal::SnrSource> resolve_snr(
    const std::optional<double>& supplied, const signal::Waveform& noisy,
    const std::optional<signal::Waveform>& clean);

struct CostModel {
  enum class Kind { kMeasured, kLinear };
  Kind kind = Kind::kMeasured;
  // Linear model: rtf = seconds_per_step * N.
  double seconds_per_step = 0.965 / 30.0;
  int repeats = 5;
};

// Externally measured quality per (utterance, N), e.g. PESQ or WER from an
// ASR run. CSV columns: utterance_id, n_steps, then any numeric columns.
struct ExternalQuality {
  std::vector<std::string> columns;
  std::map<std::pair<std::string, int>, std::map<std::string, double>> values;

  static ExternalQuality read_csv(std::istream& in);
  std::optional<double> get(const std::string& id, int n,
                            const std::string& col) const;
};

struct EvalConfig {
  diffusion::SamplerConfig sampler;
  emb::EncoderConfig encoder;
  std::size_t ensemble_size = 3;
  CostModel cost;
  bool compute_quality = true;
  const ExternalQuality* external = nullptr;
};

// Outcome for one utterance at one N.
struct RunResult {
  double rtf = 0.0;
  std::optional<double> lsd;             // candidate 0 vs clean
  std::optional<double> artifact_score;  // across the ensemble
};

// Runs (or models) one utterance at one N.
RunResult run_utterance(const DatasetItem& item, int n_steps,
                        const EvalConfig& cfg);

struct SweepRow {
  int n_steps = 0;
  double rtf = 0.0;
  std::optional<double> lsd;
  std::optional<double> artifact_score;
  std::map<std::string, double> external;
};

// Per-N medians over utterances. Throws SizeError on an empty dataset.
std::vector<SweepRow> sweep_n(std::span<const DatasetItem> dataset,
                              std::span<const int> n_values,
                              const EvalConfig& cfg);
void write_sweep_csv(std::span<const SweepRow> rows,
                     std::span<const std::string> external_columns,
                     std::ostream& out);

struct ScheduleRow {
  std::string label;
  NSchedule schedule;
  double rtf = 0.0;
  std::optional<double> rtf_delta_pct;
  std::optional<double> lsd, lsd_delta_pct;
  std::optional<double> score, score_delta_pct;
  std::map<std::string, double> external, external_delta_pct;
};

struct RtfReport {
  std::vector<ScheduleRow> rows;  // baseline first
  std::vector<std::string> external_columns;
};

// Percent change (x - base) / base * 100; nullopt when base is 0.
std::optional<double> percent_delta(double x, double base);

// Per-schedule means over utterances, deltas relative to the baseline row.
RtfReport evaluate_schedule(std::span<const DatasetItem> dataset,
                            std::span<const NSchedule> schedules,
                            const NSchedule& baseline, const EvalConfig& cfg);

// Columns: Heuristic, RTF, RTF Δ, LSD, LSD Δ, Score, Score Δ, then
// "<col>" and "<col> Δ" for each external column.
void write_report_csv(const RtfReport& report, std::ostream& out);

}  // namespace artifree::sched

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

// Per-utterance metric tables and their Pearson correlation against
// externally supplied quality scores.

#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace artifree::metrics {

struct MetricRecord {
  std::string utterance_id;
  std::optional<double> lsd;
  std::optional<double> emb_cos_dist;
  std::optional<double> vad_mismatch_s;
  std::optional<double> formant_bw_div;
  std::optional<double> pesq;
  std::optional<double> stoi;
  std::optional<double> snr_db;

  // Throws InputError on non-finite values or negative vad_mismatch_s.
  void validate() const;
};

// Columns in file order.
const std::vector<std::string>& metric_csv_columns();

// Header row then one row per record; missing values are empty cells.
void write_metric_csv(std::span<const MetricRecord> records, std::ostream& out);
// Columns may appear in any order; unknown columns are ignored and
// utterance_id is required.
std::vector<MetricRecord> read_metric_csv(std::istream& in);

// Pearson r; nullopt when fewer than 3 pairs or either side has zero
// variance.
std::optional<double> pearson(std::span<const double> x,
                              std::span<const double> y);

struct CorrelationTable {
  std::vector<std::string> artifact_metrics;  // rows
  std::vector<std::string> quality_metrics;   // columns
  std::vector<std::optional<double>> r;       // row-major
  std::vector<std::size_t> n;                 // pairs used per cell

  std::optional<double> at(std::size_t row, std::size_t col) const {
    return r[row * quality_metrics.size() + col];
  }
  bool all_undefined() const;
};

// Rows: lsd, emb_cos_dist, vad_mismatch_s, formant_bw_div, snr_db.
// Columns: pesq, stoi. Records missing either value of a pair are skipped
// for that pair only.
CorrelationTable correlation_table(std::span<const MetricRecord> records);

void write_correlation_csv(const CorrelationTable& t, std::ostream& out);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace artifree::metrics

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

#include "artifree/scheduler.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "artifree/artifact.hpp"
#include "artifree/correlation.hpp"
#include "artifree/error.hpp"
#include "artifree/metrics.hpp"

namespace artifree::sched {

std::size_t band_of_snr(double snr_db, const SnrBands& bands) {
  if (std::isnan(snr_db)) throw InputError("SNR is NaN");
  for (std::size_t b = 0; b < bands.upper_edges.size(); ++b)
    if (snr_db <= bands.upper_edges[b]) return b;
  return kNumBands - 1;
}

std::string band_name(std::size_t band) {
  static const char* kNames[kNumBands] = {"very_low", "low", "mid", "high"};
  if (band >= kNumBands) throw InputError("band index out of range");
  return kNames[band];
}

NSchedule NSchedule::fixed(int n) {
  NSchedule s;
  s.n_per_band.fill(n);
  s.validate();
  return s;
}

NSchedule NSchedule::parse(const std::string& text) {
  std::string t;
  for (char c : text)
    if (c != '[' && c != ']' && c != ' ') t.push_back(c);
  std::vector<int> values;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size())
      throw InputError("bad schedule '" + text + "'");
    values.push_back(v);
  }
  NSchedule s;
  if (values.size() == 1) {
    s.n_per_band.fill(values[0]);
  } else if (values.size() == kNumBands) {
    std::copy(values.begin(), values.end(), s.n_per_band.begin());
  } else {
    throw InputError("schedule needs 1 or 4 values: '" + text + "'");
  }
  s.validate();
  return s;
}

bool NSchedule::is_fixed() const {
  return std::all_of(n_per_band.begin(), n_per_band.end(),
                     [&](int n) { return n == n_per_band[0]; });
}

std::string NSchedule::label() const {
  if (is_fixed()) return "Fixed N=" + std::to_string(n_per_band[0]);
  std::string s = "[";
  for (std::size_t i = 0; i < kNumBands; ++i)
    s += (i ? "," : "") + std::to_string(n_per_band[i]);
  return s + "]";
}

void NSchedule::validate() const {
  for (int n : n_per_band)
    if (n < 1) throw InputError("schedule step counts must be >= 1");
}

int n_for_input(double snr_db, const NSchedule& schedule,
                const SnrBands& bands) {
  schedule.validate();
  return schedule.n_per_band[band_of_snr(snr_db, bands)];
}

std::pair<double, signal::SnrSource> resolve_snr(
    const std::optional<double>& supplied, const signal::Waveform& noisy,
    const std::optional<signal::Waveform>& clean) {
  if (supplied) return {*supplied, signal::SnrSource::kOracle};
  const auto est = signal::estimate_snr(noisy, clean);
  return {est.db, est.source};
}

// ---------------------------------------------------------------------------

ExternalQuality ExternalQuality::read_csv(std::istream& in) {
  ExternalQuality q;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("external quality CSV is empty");
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    std::string c;
    while (std::getline(ss, c, ',')) {
      while (!c.empty() && (c.back() == '\r' || c.back() == ' ')) c.pop_back();
      cells.push_back(c);
    }
    return cells;
  };
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "utterance_id" || header[1] != "n_steps")
    throw FormatError(
        "external quality CSV must start with utterance_id,n_steps,<columns>");
  q.columns.assign(header.begin() + 2, header.end());
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() < 2)
      throw FormatError("external quality line " + std::to_string(lineno));
    int n = 0;
    auto res = std::from_chars(cells[1].data(), cells[1].data() + cells[1].size(), n);
    if (res.ec != std::errc())
      throw FormatError("bad n_steps on external quality line " +
                        std::to_string(lineno));
    auto& row = q.values[{cells[0], n}];
    for (std::size_t i = 2; i < cells.size() && i < header.size(); ++i) {
      if (cells[i].empty()) continue;
      double v = 0.0;
      auto r = std::from_chars(cells[i].data(), cells[i].data() + cells[i].size(), v);
      if (r.ec != std::errc())
        throw FormatError("bad number on external quality line " +
                          std::to_string(lineno));
      row[header[i]] = v;
    }
  }
  return q;
}

std::optional<double> ExternalQuality::get(const std::string& id, int n,
                                           const std::string& col) const {
  auto it = values.find({id, n});
  if (it == values.end()) return std::nullopt;
  auto c = it->second.find(col);
  if (c == it->second.end()) return std::nullopt;
  return c->second;
}

// ---------------------------------------------------------------------------

RunResult run_utterance(const DatasetItem& item, int n_steps,
                        const EvalConfig& cfg) {
  diffusion::SamplerConfig sampler = cfg.sampler;
  sampler.n_steps = n_steps;
  RunResult r;
  if (cfg.cost.kind == CostModel::Kind::kLinear) {
    r.rtf = cfg.cost.seconds_per_step * n_steps;
  } else {
    const auto prepared =
        diffusion::prepare_input(item.noisy, item.clean, sampler.stft);
    const auto m = diffusion::measure_rtf(
        [&] { (void)diffusion::enhance_detailed(prepared, sampler); },
        item.noisy.duration_seconds(), n_steps, cfg.cost.repeats);
    r.rtf = m.rtf;
  }
  if (!cfg.compute_quality) return r;

  const auto members = diffusion::enhance_ensemble(item.noisy, item.clean,
                                                   sampler, cfg.ensemble_size);
  r.lsd = metrics::lsd(item.clean, members[0].wave, cfg.encoder.stft);
  if (members.size() >= 2) {
    std::vector<emb::EmbeddingSequence> embs;
    for (const auto& m : members)
      embs.push_back(emb::reference_encode(m.wave, cfg.encoder));
    r.artifact_score = artifact::artifact_score(artifact::frame_variance(embs));
  }
  return r;
}

namespace {

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::optional<double> MedianOpt(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return Median(v);
}

std::optional<double> MeanOpt(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void WriteCell(std::ostream& out, const std::optional<double>& v) {
  out << ',';
  if (v) out << metrics::format_double(*v);
}

}  // namespace

std::vector<SweepRow> sweep_n(std::span<const DatasetItem> dataset,
                              std::span<const int> n_values,
                              const EvalConfig& cfg) {
  if (dataset.empty()) throw SizeError("sweep over an empty dataset");
  if (n_values.empty()) throw InputError("no N values to sweep");
  std::vector<SweepRow> rows;
  for (int n : n_values) {
    if (n < 1) throw InputError("N must be >= 1");
    std::vector<double> rtf, lsd, score;
    std::map<std::string, std::vector<double>> ext;
    for (const auto& item : dataset) {
      const auto r = run_utterance(item, n, cfg);
      rtf.push_back(r.rtf);
      if (r.lsd) lsd.push_back(*r.lsd);
      if (r.artifact_score) score.push_back(*r.artifact_score);
      if (cfg.external)
        for (const auto& col : cfg.external->columns)
          if (auto v = cfg.external->get(item.id, n, col)) ext[col].push_back(*v);
    }
    SweepRow row;
    row.n_steps = n;
    row.rtf = Median(rtf);
    row.lsd = MedianOpt(lsd);
    row.artifact_score = MedianOpt(score);
    for (auto& [col, vals] : ext) row.external[col] = Median(vals);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(std::span<const SweepRow> rows,
                     std::span<const std::string> external_columns,
                     std::ostream& out) {
  out << "N,RTF,LSD,ArtifactScore";
  for (const auto& c : external_columns) out << ',' << c;
  out << '\n';
  for (const auto& r : rows) {
    out << r.n_steps << ',' << metrics::format_double(r.rtf);
    WriteCell(out, r.lsd);
    WriteCell(out, r.artifact_score);
    for (const auto& c : external_columns) {
      auto it = r.external.find(c);
      WriteCell(out, it == r.external.end() ? std::nullopt
                                            : std::optional<double>(it->second));
    }
    out << '\n';
  }
}

std::optional<double> percent_delta(double x, double base) {
  if (base == 0.0) return std::nullopt;
  return (x - base) / base * 100.0;
}

RtfReport evaluate_schedule(std::span<const DatasetItem> dataset,
                            std::span<const NSchedule> schedules,
                            const NSchedule& baseline, const EvalConfig& cfg) {
  if (dataset.empty()) throw SizeError("schedule evaluation over an empty dataset");
  baseline.validate();

  std::vector<NSchedule> all{baseline};
  for (const auto& s : schedules) {
    s.validate();
    if (s.n_per_band != baseline.n_per_band) all.push_back(s);
  }

  // Each (utterance, N) pair is run once and shared across schedules.
  std::map<std::pair<std::size_t, int>, RunResult> cache;
  for (const auto& s : all) {
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const int n = n_for_input(dataset[i].snr_db, s);
      if (!cache.count({i, n})) cache[{i, n}] = run_utterance(dataset[i], n, cfg);
    }
  }

  RtfReport report;
  if (cfg.external) report.external_columns = cfg.external->columns;
  for (const auto& s : all) {
    std::vector<double> rtf, lsd, score;
    std::map<std::string, std::vector<double>> ext;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const int n = n_for_input(dataset[i].snr_db, s);
      const auto& r = cache.at({i, n});
      rtf.push_back(r.rtf);
      if (r.lsd) lsd.push_back(*r.lsd);
      if (r.artifact_score) score.push_back(*r.artifact_score);
      if (cfg.external)
        for (const auto& col : cfg.external->columns)
          if (auto v = cfg.external->get(dataset[i].id, n, col))
            ext[col].push_back(*v);
    }
    ScheduleRow row;
    row.label = s.label();
    row.schedule = s;
    row.rtf = *MeanOpt(rtf);
    row.lsd = MeanOpt(lsd);
    row.score = MeanOpt(score);
    for (auto& [col, vals] : ext) row.external[col] = *MeanOpt(vals);
    report.rows.push_back(std::move(row));
  }

  const ScheduleRow base = report.rows.front();
  for (auto& row : report.rows) {
    row.rtf_delta_pct = percent_delta(row.rtf, base.rtf);
    if (row.lsd && base.lsd) row.lsd_delta_pct = percent_delta(*row.lsd, *base.lsd);
    if (row.score && base.score)
      row.score_delta_pct = percent_delta(*row.score, *base.score);
    for (const auto& [col, v] : row.external) {
      auto b = base.external.find(col);
      if (b == base.external.end()) continue;
      if (auto d = percent_delta(v, b->second)) row.external_delta_pct[col] = *d;
    }
  }
  return report;
}

void write_report_csv(const RtfReport& report, std::ostream& out) {
  out << "Heuristic,RTF,RTF \xCE\x94,LSD,LSD \xCE\x94,Score,Score \xCE\x94";
  for (const auto& c : report.external_columns)
    out << ',' << c << ',' << c << " \xCE\x94";
  out << '\n';
  auto find = [](const std::map<std::string, double>& m,
                 const std::string& k) -> std::optional<double> {
    auto it = m.find(k);
    if (it == m.end()) return std::nullopt;
    return it->second;
  };
  for (const auto& r : report.rows) {
    out << '"' << r.label << '"' << ',' << metrics::format_double(r.rtf);
    WriteCell(out, r.rtf_delta_pct);
    WriteCell(out, r.lsd);
    WriteCell(out, r.lsd_delta_pct);
    WriteCell(out, r.score);
    WriteCell(out, r.score_delta_pct);
    for (const auto& c : report.external_columns) {
      WriteCell(out, find(r.external, c));
      WriteCell(out, find(r.external_delta_pct, c));
    }
    out << '\n';
  }
}

}  // namespace artifree::sched

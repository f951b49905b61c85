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

#include "artifree/correlation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "artifree/error.hpp"

namespace artifree::metrics {

void MetricRecord::validate() const {
  for (const auto* v : {&lsd, &emb_cos_dist, &vad_mismatch_s, &formant_bw_div,
                        &pesq, &stoi, &snr_db})
    if (*v && !std::isfinite(**v))
      throw InputError("non-finite metric for " + utterance_id);
  if (vad_mismatch_s && *vad_mismatch_s < 0.0)
    throw InputError("negative vad_mismatch_s for " + utterance_id);
}

namespace {

using Field = std::optional<double> MetricRecord::*;

const std::vector<std::pair<std::string, Field>>& Fields() {
  static const std::vector<std::pair<std::string, Field>> kFields = {
      {"lsd", &MetricRecord::lsd},
      {"emb_cos_dist", &MetricRecord::emb_cos_dist},
      {"vad_mismatch_s", &MetricRecord::vad_mismatch_s},
      {"formant_bw_div", &MetricRecord::formant_bw_div},
      {"pesq", &MetricRecord::pesq},
      {"stoi", &MetricRecord::stoi},
      {"snr_db", &MetricRecord::snr_db},
  };
  return kFields;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string Trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& metric_csv_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"utterance_id"};
    for (const auto& [name, field] : Fields()) c.push_back(name);
    return c;
  }();
  return cols;
}

void write_metric_csv(std::span<const MetricRecord> records, std::ostream& out) {
  const auto& cols = metric_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i)
    out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : records) {
    out << r.utterance_id;
    for (const auto& [name, field] : Fields()) {
      out << ',';
      if (r.*field) out << format_double(*(r.*field));
    }
    out << '\n';
  }
}

std::vector<MetricRecord> read_metric_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("metric CSV is empty");
  const auto header = SplitCsv(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[Trim(header[i])] = i;
  if (!col.count("utterance_id"))
    throw FormatError("metric CSV lacks an utterance_id column");

  std::vector<MetricRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (Trim(line).empty()) continue;
    const auto cells = SplitCsv(line);
    if (cells.size() != header.size())
      throw FormatError("metric CSV line " + std::to_string(lineno) +
                        ": expected " + std::to_string(header.size()) +
                        " cells");
    MetricRecord r;
    r.utterance_id = Trim(cells[col["utterance_id"]]);
    for (const auto& [name, field] : Fields()) {
      auto it = col.find(name);
      if (it == col.end()) continue;
      const std::string cell = Trim(cells[it->second]);
      if (cell.empty()) continue;
      double v = 0.0;
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw FormatError("metric CSV line " + std::to_string(lineno) +
                          ": bad number '" + cell + "'");
      r.*field = v;
    }
    r.validate();
    out.push_back(std::move(r));
  }
  return out;
}

std::optional<double> pearson(std::span<const double> x,
                              std::span<const double> y) {
  if (x.size() != y.size()) throw IncompatibleError("pearson length mismatch");
  const std::size_t n = x.size();
  if (n < 3) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

bool CorrelationTable::all_undefined() const {
  for (const auto& v : r)
    if (v) return false;
  return true;
}

CorrelationTable correlation_table(std::span<const MetricRecord> records) {
  static const std::vector<std::pair<std::string, Field>> kRows = {
      {"lsd", &MetricRecord::lsd},
      {"emb_cos_dist", &MetricRecord::emb_cos_dist},
      {"vad_mismatch_s", &MetricRecord::vad_mismatch_s},
      {"formant_bw_div", &MetricRecord::formant_bw_div},
      {"snr_db", &MetricRecord::snr_db},
  };
  static const std::vector<std::pair<std::string, Field>> kCols = {
      {"pesq", &MetricRecord::pesq},
      {"stoi", &MetricRecord::stoi},
  };
  CorrelationTable t;
  for (const auto& [name, f] : kRows) t.artifact_metrics.push_back(name);
  for (const auto& [name, f] : kCols) t.quality_metrics.push_back(name);
  for (const auto& [rn, rf] : kRows) {
    for (const auto& [cn, cf] : kCols) {
      std::vector<double> x, y;
      for (const auto& rec : records) {
        if (rec.*rf && rec.*cf) {
          x.push_back(*(rec.*rf));
          y.push_back(*(rec.*cf));
        }
      }
      t.n.push_back(x.size());
      t.r.push_back(pearson(x, y));
    }
  }
  return t;
}

void write_correlation_csv(const CorrelationTable& t, std::ostream& out) {
  out << "metric";
  for (const auto& c : t.quality_metrics) out << ",r_" << c << ",n_" << c;
  out << '\n';
  for (std::size_t i = 0; i < t.artifact_metrics.size(); ++i) {
    out << t.artifact_metrics[i];
    for (std::size_t j = 0; j < t.quality_metrics.size(); ++j) {
      out << ',';
      if (auto v = t.at(i, j)) out << format_double(*v);
      out << ',' << t.n[i * t.quality_metrics.size() + j];
    }
    out << '\n';
  }
}

}  // namespace artifree::metrics

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

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "artifree/error.hpp"
#include "artifree/scheduler.hpp"
#include "artifree/synth.hpp"

using namespace artifree;
using namespace artifree::sched;

namespace {

// One utterance per band unless `per_band` says otherwise.
std::vector<DatasetItem> BandDataset(std::size_t per_band = 1) {
  const double snrs[kNumBands] = {0.0, 5.0, 10.0, 15.0};
  std::vector<DatasetItem> items;
  for (std::size_t b = 0; b < kNumBands; ++b)
    for (std::size_t k = 0; k < per_band; ++k) {
      DatasetItem it;
      it.id = "u" + std::to_string(b) + "_" + std::to_string(k);
      it.clean.samples.assign(1600, 0.0f);
      it.noisy = it.clean;
      it.snr_db = snrs[b];
      items.push_back(std::move(it));
    }
  return items;
}

EvalConfig LinearConfig() {
  EvalConfig cfg;
  cfg.cost.kind = CostModel::Kind::kLinear;
  cfg.compute_quality = false;
  return cfg;
}

}  // namespace

TEST_SUITE("scheduler") {

TEST_CASE("SNR bands are half-open on the left") {
  CHECK(band_of_snr(-40.0) == 0);
  CHECK(band_of_snr(0.0) == 0);
  CHECK(band_of_snr(3.0) == 0);
  CHECK(band_of_snr(std::nextafter(3.0, 4.0)) == 1);
  CHECK(band_of_snr(8.0) == 1);
  CHECK(band_of_snr(10.0) == 2);
  CHECK(band_of_snr(13.0) == 2);
  CHECK(band_of_snr(13.5) == 3);
  CHECK(band_of_snr(INFINITY) == 3);
  CHECK_THROWS_AS(band_of_snr(std::nan("")), InputError);
  CHECK(band_name(0) == "very_low");
  CHECK(band_name(3) == "high");
}

TEST_CASE("schedule parsing and lookup") {
  const auto s = NSchedule::parse("[20, 30, 20, 10]");
  CHECK(s.label() == "[20,30,20,10]");
  CHECK_FALSE(s.is_fixed());
  CHECK(n_for_input(2.0, s) == 20);
  CHECK(n_for_input(6.0, s) == 30);
  CHECK(n_for_input(12.0, s) == 20);
  CHECK(n_for_input(25.0, s) == 10);
  CHECK(NSchedule::parse("30").label() == "Fixed N=30");
  CHECK(NSchedule::fixed(10).n_per_band[2] == 10);
  CHECK_THROWS_AS(NSchedule::parse("20,30"), InputError);
  CHECK_THROWS_AS(NSchedule::parse("20,30,x,10"), InputError);
  CHECK_THROWS_AS(NSchedule::parse("20,0,20,10"), InputError);
}

TEST_CASE("linear cost reproduces hand-computed deltas") {
  const auto data = BandDataset(3);
  const auto cfg = LinearConfig();
  const std::vector<NSchedule> schedules{NSchedule::parse("20,30,20,10"),
                                         NSchedule::fixed(10), NSchedule::fixed(30)};
  const auto rep = evaluate_schedule(data, schedules, NSchedule::fixed(30), cfg);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0].label == "Fixed N=30");
  CHECK(*rep.rows[0].rtf_delta_pct == 0.0);
  CHECK(std::abs(*rep.rows[1].rtf_delta_pct - (80.0 - 120.0) / 120.0 * 100.0) < 1e-9);
  CHECK(std::abs(*rep.rows[2].rtf_delta_pct - (10.0 - 30.0) / 30.0 * 100.0) < 1e-9);
  CHECK(rep.rows[0].rtf == doctest::Approx(cfg.cost.seconds_per_step * 30));
  CHECK_FALSE(rep.rows[1].lsd.has_value());
}

TEST_CASE("a dominated schedule never costs more") {
  const auto data = BandDataset(2);
  const auto cfg = LinearConfig();
  std::mt19937_64 g(3);
  for (int trial = 0; trial < 50; ++trial) {
    NSchedule hi, lo;
    for (std::size_t b = 0; b < kNumBands; ++b) {
      hi.n_per_band[b] = 1 + static_cast<int>(g() % 40);
      lo.n_per_band[b] = 1 + static_cast<int>(g() % hi.n_per_band[b]);
    }
    const auto rep = evaluate_schedule(data, std::vector<NSchedule>{lo}, hi, cfg);
    CHECK(rep.rows.back().rtf <= rep.rows.front().rtf);
  }
}

TEST_CASE("sweep rows and CSV") {
  const auto data = BandDataset();
  const std::vector<int> ns{5, 10};
  const auto rows = sweep_n(data, ns, LinearConfig());
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].rtf == doctest::Approx(2 * rows[0].rtf));
  std::ostringstream out;
  write_sweep_csv(rows, {}, out);
  CHECK(out.str().rfind("N,RTF,LSD,ArtifactScore\n5,", 0) == 0);
  CHECK_THROWS_AS(sweep_n({}, ns, LinearConfig()), SizeError);
}

TEST_CASE("quality from a real sampler run") {
  DatasetItem it;
  it.id = "q";
  it.clean = synth::synth_utterance(1, 0.6, 16000).wave;
  it.noisy = signal::mix_at_snr(
      it.clean, synth::noise(synth::NoiseColor::kWhite, it.clean.size(), 16000, 2), 5.0, 3);
  it.snr_db = 5.0;
  auto cfg = LinearConfig();
  cfg.compute_quality = true;
  cfg.ensemble_size = 2;
  const auto r = run_utterance(it, 5, cfg);
  REQUIRE(r.lsd.has_value());
  REQUIRE(r.artifact_score.has_value());
  CHECK(*r.lsd > 0.0);
  CHECK(*r.artifact_score > 0.0);
}

TEST_CASE("external quality columns flow into the report") {
  std::istringstream csv(
      "utterance_id,n_steps,pesq\n"
      "u0_0,30,2.0\nu1_0,30,2.0\nu2_0,30,2.0\nu3_0,30,2.0\n"
      "u0_0,20,1.0\nu1_0,20,1.0\nu2_0,20,1.0\nu3_0,20,1.0\n");
  const auto ext = ExternalQuality::read_csv(csv);
  CHECK(ext.columns == std::vector<std::string>{"pesq"});
  CHECK(*ext.get("u2_0", 20, "pesq") == 1.0);
  CHECK_FALSE(ext.get("zz", 20, "pesq").has_value());

  auto cfg = LinearConfig();
  cfg.external = &ext;
  const auto rep = evaluate_schedule(BandDataset(), std::vector<NSchedule>{NSchedule::fixed(20)},
                                     NSchedule::fixed(30), cfg);
  CHECK(rep.rows[1].external.at("pesq") == 1.0);
  CHECK(rep.rows[1].external_delta_pct.at("pesq") == doctest::Approx(-50.0));

  std::ostringstream out;
  write_report_csv(rep, out);
  const std::string s = out.str();
  CHECK(s.rfind("Heuristic,RTF,RTF \xCE\x94,LSD,LSD \xCE\x94,Score,Score \xCE\x94,pesq,pesq \xCE\x94\n", 0) == 0);
  CHECK(s.find("\"Fixed N=20\"") != std::string::npos);

  std::istringstream bad("id,n,pesq\n");
  CHECK_THROWS_AS(ExternalQuality::read_csv(bad), FormatError);
}

TEST_CASE("resolve_snr prefers the supplied value") {
  signal::Waveform w;
  w.samples.assign(1600, 0.1f);
  const auto [db, src] = resolve_snr(7.5, w, std::nullopt);
  CHECK(db == 7.5);
  CHECK(src == signal::SnrSource::kOracle);
  CHECK(percent_delta(1.0, 0.0) == std::nullopt);
}

}  // TEST_SUITE

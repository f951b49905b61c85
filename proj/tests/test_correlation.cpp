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

#include <random>
#include <sstream>

#include "artifree/correlation.hpp"
#include "artifree/error.hpp"
#include "oracles.hpp"

using namespace artifree;
using namespace artifree::metrics;

TEST_SUITE("correlation") {

TEST_CASE("perfect linear relations") {
  std::vector<double> x{1, 2, 3, 4, 5}, y, z;
  for (double v : x) {
    y.push_back(2 * v + 1);
    z.push_back(-v);
  }
  CHECK(pearson(x, y).value() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson(x, z).value() == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("undefined cases") {
  CHECK_FALSE(pearson(std::vector<double>{1, 2}, std::vector<double>{3, 4}).has_value());
  CHECK_FALSE(pearson(std::vector<double>{1, 1, 1}, std::vector<double>{3, 4, 5}).has_value());
  CHECK_THROWS_AS(pearson(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}),
                  IncompatibleError);
}

TEST_CASE("pearson matches the covariance-sum oracle and is affine invariant") {
  std::mt19937_64 g(1);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t len = 3 + g() % 50;
    std::vector<double> x(len), y(len);
    for (std::size_t i = 0; i < len; ++i) {
      x[i] = n(g);
      y[i] = 0.5 * x[i] + n(g);
    }
    const double r = pearson(x, y).value();
    CHECK(std::abs(r - oracle::pearson(x, y)) < 1e-9);
    const double a = u(g), b = n(g) * 5, c = u(g), d = n(g) * 5;
    std::vector<double> xt(len), yt(len);
    for (std::size_t i = 0; i < len; ++i) {
      xt[i] = a * x[i] + b;
      yt[i] = c * y[i] + d;
    }
    CHECK(std::abs(pearson(xt, yt).value() - r) < 1e-12);
    CHECK(pearson(y, x).value() == doctest::Approx(r).epsilon(1e-15));
  }
}

TEST_CASE("correlation table ignores missing values pairwise") {
  std::vector<MetricRecord> recs;
  for (int i = 0; i < 6; ++i) {
    MetricRecord r;
    r.utterance_id = "u" + std::to_string(i);
    r.lsd = i;
    r.pesq = 4.0 - 0.5 * i;
    if (i != 2) r.stoi = 0.1 * i * i;
    if (i < 2) r.emb_cos_dist = 0.1 * i;
    recs.push_back(r);
  }
  const auto t = correlation_table(recs);
  CHECK(t.artifact_metrics ==
        std::vector<std::string>{"lsd", "emb_cos_dist", "vad_mismatch_s", "formant_bw_div", "snr_db"});
  CHECK(t.quality_metrics == std::vector<std::string>{"pesq", "stoi"});
  CHECK(t.at(0, 0).value() == doctest::Approx(-1.0));
  CHECK(t.n[1] == 5);
  CHECK_FALSE(t.at(1, 0).has_value());  // two pairs only
  CHECK_FALSE(t.at(2, 0).has_value());
  CHECK_FALSE(t.all_undefined());
  std::ostringstream out;
  write_correlation_csv(t, out);
  CHECK(out.str().rfind("metric,r_pesq,n_pesq,r_stoi,n_stoi\nlsd,-1,6,", 0) == 0);
}

TEST_CASE("metric CSV round trip in any column order") {
  std::vector<MetricRecord> recs(2);
  recs[0].utterance_id = "a";
  recs[0].lsd = 1.25;
  recs[0].pesq = 3.5;
  recs[1].utterance_id = "b";
  recs[1].vad_mismatch_s = 0.016;
  recs[1].snr_db = -3;
  std::ostringstream out;
  write_metric_csv(recs, out);
  std::istringstream in(out.str());
  const auto back = read_metric_csv(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0].lsd == 1.25);
  CHECK(back[0].pesq == 3.5);
  CHECK_FALSE(back[0].stoi.has_value());
  CHECK(back[1].vad_mismatch_s == 0.016);
  std::istringstream shuffled("pesq,utterance_id,lsd\n2.5,x,7\n");
  const auto s = read_metric_csv(shuffled);
  CHECK(s[0].utterance_id == "x");
  CHECK(s[0].lsd == 7.0);
  std::istringstream bad("utterance_id,lsd\nx,abc\n");
  CHECK_THROWS_AS(read_metric_csv(bad), FormatError);
  std::istringstream neg("utterance_id,vad_mismatch_s\nx,-1\n");
  CHECK_THROWS_AS(read_metric_csv(neg), InputError);
}

}  // TEST_SUITE

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

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "artifree/embeddings.hpp"
#include "cli.hpp"
#include "oracles.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using artifree::cli::run_cli;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome Run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path Scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("artifree_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<json> Lines(const std::string& text) {
  std::vector<json> v;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) v.push_back(json::parse(line));
  return v;
}

// Manifest of EMB1-only entries: candidate k for k < cands.size(), plus clean.
fs::path EmbManifest(const fs::path& dir, const artifree::emb::EmbeddingSequence& clean,
                     const std::vector<artifree::emb::EmbeddingSequence>& cands) {
  std::ofstream m(dir / "manifest.jsonl");
  artifree::emb::write_emb(clean, dir / "clean.emb");
  m << R"({"utterance_id":"u","role":"clean","emb_path":"clean.emb"})" << '\n';
  for (std::size_t k = 0; k < cands.size(); ++k) {
    const std::string name = "c" + std::to_string(k) + ".emb";
    artifree::emb::write_emb(cands[k], dir / name);
    m << json{{"utterance_id", "u"}, {"role", "candidate"}, {"index", k}, {"emb_path", name}}.dump()
      << '\n';
  }
  return dir / "manifest.jsonl";
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("identical candidates are never flagged") {
  const auto dir = Scratch("identical");
  std::mt19937_64 g(1);
  const auto e = oracle::random_sequence(g, 20, 8);
  const auto m = EmbManifest(dir, e, {e, e, e});
  const auto r = Run({"detect", "--manifest", m.string(), "--tau", "1e-12"});
  REQUIRE(r.code == 0);
  const auto rows = Lines(r.out);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0]["a"].get<double>() == 0.0);
  CHECK(rows[0]["flag"].get<int>() == 0);
  CHECK(rows[0]["ensemble_size"].get<int>() == 3);
  fs::remove_all(dir);
}

TEST_CASE("clean-correlation selection picks the clean copy") {
  const auto dir = Scratch("select");
  std::mt19937_64 g(2);
  const auto clean = oracle::random_sequence(g, 20, 8);
  const auto m = EmbManifest(
      dir, clean, {oracle::random_sequence(g, 20, 8), oracle::random_sequence(g, 20, 8), clean});
  const auto r = Run({"select", "--manifest", m.string(), "--heuristic", "clean"});
  REQUIRE(r.code == 0);
  const auto rows = Lines(r.out);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0]["chosen_index"].get<int>() == 2);
  CHECK(Run({"select", "--manifest", m.string(), "--heuristic", "noisy"}).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("full pipeline on simulated data") {
  const auto dir = Scratch("pipeline");
  const std::string out = (dir / "sim").string();
  auto r = Run({"simulate", "--synthetic", "6", "--seconds", "0.8", "--S", "3", "--snr", "-10",
                "--artifact-fraction", "0.5", "--sigma0", "0.01", "--out", out, "--seed", "4"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const std::string manifest = out + "/manifest.jsonl";
  CHECK(fs::exists(out + "/syn0000/cand0.emb"));

  const std::string cal = (dir / "cal.json").string();
  r = Run({"calibrate", "--manifest", manifest, "--out", cal});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto calj = json::parse(Slurp(cal));
  CHECK(calj["ensemble_size"].get<int>() == 3);
  CHECK(calj["utterances"].get<int>() == 6);

  const std::string det = (dir / "det.jsonl").string();
  r = Run({"detect", "--manifest", manifest, "--calibration", cal, "--out", det});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto det_rows = Lines(Slurp(det));
  CHECK(det_rows.size() == 6);

  const std::string sel = (dir / "sel.jsonl").string();
  r = Run({"select", "--manifest", manifest, "--heuristic", "centrality", "--out", sel});
  REQUIRE_MESSAGE(r.code == 0, r.err);

  const std::string wer = (dir / "wer.jsonl").string();
  r = Run({"wer", "--manifest", manifest, "--selection", sel, "--out", wer, "--summary",
           (dir / "wer_sum.json").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);

  r = Run({"report", "--detect", det, "--select", sel, "--wer", wer, "--calibration", cal});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto rep = json::parse(r.out);
  std::size_t flagged = 0;
  for (const auto& j : det_rows) flagged += j["flag"].get<int>();
  CHECK(rep["detect"]["utterances"].get<std::size_t>() == 6);
  CHECK(rep["detect"]["flagged"].get<std::size_t>() == flagged);
  const auto sum = json::parse(Slurp(dir / "wer_sum.json"));
  CHECK(rep["wer"]["distance"] == sum["distance"]);
  CHECK(rep["calibration"]["tau"] == calj["tau"]);

  const std::string met = (dir / "met.csv").string();
  r = Run({"metrics", "--manifest", manifest, "--selection", sel, "--out", met});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(Slurp(met).rfind("utterance_id,", 0) == 0);
  // No quality scores: every correlation is undefined.
  r = Run({"correlate", "--metrics", met});
  CHECK(r.code == 3);
  CHECK(json::parse(r.err)["sentinel"] == "undefined-metric");

  const std::string emb_dir = (dir / "emb").string();
  r = Run({"embed", "--manifest", manifest, "--out", emb_dir});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  r = Run({"detect", "--manifest", emb_dir + "/manifest.jsonl", "--calibration", cal});
  REQUIRE(r.code == 0);
  CHECK(Lines(r.out) == det_rows);
  fs::remove_all(dir);
}

TEST_CASE("simulate is deterministic for a fixed seed") {
  const auto dir = Scratch("determinism");
  for (const char* name : {"a", "b"}) {
    const auto r = Run({"simulate", "--synthetic", "2", "--seconds", "0.6", "--S", "2",
                        "--out", (dir / name).string(), "--seed", "9", "--jobs", "2"});
    REQUIRE(r.code == 0);
  }
  CHECK(Slurp(dir / "a/manifest.jsonl") == Slurp(dir / "b/manifest.jsonl"));
  CHECK(Slurp(dir / "a/syn0001/cand1.emb") == Slurp(dir / "b/syn0001/cand1.emb"));
  CHECK(Slurp(dir / "a/syn0001/noisy.wav") == Slurp(dir / "b/syn0001/noisy.wav"));
  fs::remove_all(dir);
}

TEST_CASE("schedule evaluation under linear cost") {
  const auto r = Run({"eval-schedule", "--synthetic", "4", "--seconds", "0.5", "--snr",
                      "0,5,10,15", "--cost", "linear", "--no-quality", "--schedule",
                      "[20,30,20,10]", "--schedule", "10"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("\"[20,30,20,10]\",0.64333333") != std::string::npos);
  CHECK(r.out.find(",-33.3333333333") != std::string::npos);
  CHECK(r.out.find("\"Fixed N=10\"") != std::string::npos);
  const auto s = Run({"sweep-n", "--synthetic", "2", "--seconds", "0.5", "--cost", "linear",
                      "--no-quality", "--n", "5,10"});
  REQUIRE(s.code == 0);
  CHECK(s.out.rfind("N,RTF,LSD,ArtifactScore\n5,", 0) == 0);
}

TEST_CASE("exit codes for input errors and sentinels") {
  const auto dir = Scratch("errors");
  auto r = Run({"detect", "--manifest", (dir / "none.jsonl").string(), "--tau", "1"});
  CHECK(r.code == 2);
  CHECK(json::parse(r.err)["error"] == "io");
  CHECK(Run({"detect", "--bogus"}).code == 2);
  CHECK(Run({"select", "--manifest", "x", "--heuristic", "vibes"}).code == 2);
  CHECK(Run({"--help"}).code == 0);

  std::ofstream(dir / "ref.txt") << "u1\t\n";
  std::ofstream(dir / "hyp.txt") << "u1\tsome words\n";
  r = Run({"wer", "--ref", (dir / "ref.txt").string(), "--hyp", (dir / "hyp.txt").string()});
  CHECK(r.code == 3);
  std::ofstream(dir / "hyp.txt") << "u1\tsome words\nu2\tx\n";
  CHECK(Run({"wer", "--ref", (dir / "ref.txt").string(), "--hyp", (dir / "hyp.txt").string()})
            .code == 2);
  fs::remove_all(dir);
}

}  // TEST_SUITE

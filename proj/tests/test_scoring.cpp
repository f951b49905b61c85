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

#include "artifree/error.hpp"
#include "artifree/scoring.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace artifree;
using namespace artifree::metrics;

namespace {

TokenSeq Words(const std::string& s) { return tokenize(s, TokenLevel::kWord); }

const char* kRef = fixture::kTranscriptRef;
const auto& kHyps = fixture::kTranscriptHyps;

}  // namespace

TEST_SUITE("scoring") {

TEST_CASE("kitten to sitting") {
  const auto c = edit_distance(tokenize("kitten", TokenLevel::kChar),
                               tokenize("sitting", TokenLevel::kChar));
  CHECK(c.distance == 3);
  CHECK(c.distance == oracle::levenshtein(tokenize("kitten", TokenLevel::kChar).tokens,
                                          tokenize("sitting", TokenLevel::kChar).tokens));
  CHECK(c.substitutions == 2);
  CHECK(c.insertions == 1);
  CHECK(c.deletions == 0);
}

TEST_CASE("identical sequences have distance zero") {
  const auto c = edit_distance(Words("a b c"), Words("a  b\tc"));
  CHECK(c.distance == 0);
  CHECK(error_rate(c) == 0.0);
}

TEST_CASE("hallucinated transcript variants agree with the recursive oracle") {
  const auto ref = Words(kRef);
  REQUIRE(ref.tokens.size() == 11);
  for (const char* h : kHyps) {
    const auto hyp = Words(h);
    const auto c = edit_distance(ref, hyp);
    CHECK(c.distance == oracle::levenshtein(ref.tokens, hyp.tokens));
    CHECK(c.distance == c.substitutions + c.insertions + c.deletions);
  }
  // Two substituted words plus a changed article.
  const auto second = edit_distance(ref, Words(kHyps[1]));
  CHECK(second.distance == 3);
  CHECK(error_rate(second) == doctest::Approx(3.0 / 11.0));
  // Article change, dropped word, substituted word.
  const auto third = edit_distance(ref, Words(kHyps[2]));
  CHECK(third.deletions == 1);
  CHECK(error_rate(third) == doctest::Approx(3.0 / 11.0));
}

TEST_CASE("1000 random pairs match the recursive oracle") {
  std::mt19937_64 g(7);
  const char* alphabet[] = {"a", "b", "c", "d"};
  for (int trial = 0; trial < 1000; ++trial) {
    TokenSeq a, b;
    const auto la = g() % 13, lb = g() % 13;
    for (std::size_t i = 0; i < la; ++i) a.tokens.push_back(alphabet[g() % 4]);
    for (std::size_t i = 0; i < lb; ++i) b.tokens.push_back(alphabet[g() % 4]);
    const auto c = edit_distance(a, b);
    REQUIRE(c.distance == oracle::levenshtein(a.tokens, b.tokens));
    CHECK(c.distance == c.substitutions + c.insertions + c.deletions);
    // Alignment bookkeeping: |hyp| = |ref| - D + I.
    CHECK(lb == la - c.deletions + c.insertions);
  }
}

TEST_CASE("empty reference is a division error") {
  const auto c = edit_distance(Words(""), Words("x y"));
  CHECK(c.insertions == 2);
  CHECK_THROWS_AS(error_rate(c), DivisionError);
}

TEST_CASE("counts accumulate for corpus-level rates") {
  EditCounts total;
  total += edit_distance(Words("a b c d"), Words("a x c d"));
  total += edit_distance(Words("e f"), Words("e"));
  CHECK(total.distance == 2);
  CHECK(total.ref_length == 6);
  CHECK(error_rate(total) == doctest::Approx(2.0 / 6.0));
}

TEST_CASE("transcript files") {
  const auto t = parse_transcripts("u1\tTHE CAT\nu2 a dog\r\n\nu3\t\n");
  CHECK(t.at("u1") == "THE CAT");
  CHECK(t.at("u2") == "a dog");
  CHECK(t.at("u3").empty());
  CHECK_THROWS_AS(parse_transcripts("u1\ta\nu1\tb\n"), FormatError);
  CHECK_THROWS_AS(parse_token_level("syllable"), InputError);
}

}  // TEST_SUITE

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

// Transcript scoring: unit-cost Levenshtein alignment for WER/PER/LPD.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace artifree::metrics {

enum class TokenLevel { kWord, kPhoneme, kChar };
TokenLevel parse_token_level(const std::string& s);

struct TokenSeq {
  std::vector<std::string> tokens;
  TokenLevel level = TokenLevel::kWord;
};

// Words and phonemes split on whitespace; kChar yields one token per
// non-space byte.
TokenSeq tokenize(const std::string& text, TokenLevel level);

struct EditCounts {
  std::size_t distance = 0;
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t ref_length = 0;
};

// Reference first. The backtrace prefers match/substitution, then deletion,
// then insertion, so S/I/D splits are deterministic.
EditCounts edit_distance(const TokenSeq& ref, const TokenSeq& hyp);

// (S + I + D) / ref_length; DivisionError on an empty reference.
double error_rate(const EditCounts& c);

EditCounts& operator+=(EditCounts& a, const EditCounts& b);

// "utterance_id<TAB>tokens..." per line; a space is accepted in place of
// the tab. Duplicate ids throw FormatError.
std::map<std::string, std::string> read_transcripts(
    const std::filesystem::path& path);
std::map<std::string, std::string> parse_transcripts(const std::string& text);

}  // namespace artifree::metrics

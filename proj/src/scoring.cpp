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

#include "artifree/scoring.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include "artifree/error.hpp"

namespace artifree::metrics {

TokenLevel parse_token_level(const std::string& s) {
  if (s == "word") return TokenLevel::kWord;
  if (s == "phoneme") return TokenLevel::kPhoneme;
  if (s == "char") return TokenLevel::kChar;
  throw InputError("unknown token level '" + s + "'");
}

TokenSeq tokenize(const std::string& text, TokenLevel level) {
  TokenSeq seq;
  seq.level = level;
  if (level == TokenLevel::kChar) {
    for (char c : text)
      if (!std::isspace(static_cast<unsigned char>(c)))
        seq.tokens.emplace_back(1, c);
    return seq;
  }
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) seq.tokens.push_back(tok);
  return seq;
}

EditCounts edit_distance(const TokenSeq& ref, const TokenSeq& hyp) {
  const auto& r = ref.tokens;
  const auto& h = hyp.tokens;
  const std::size_t m = r.size(), n = h.size();
  const std::size_t w = n + 1;
  std::vector<std::uint32_t> d((m + 1) * w);
  for (std::size_t i = 0; i <= m; ++i) d[i * w] = static_cast<std::uint32_t>(i);
  for (std::size_t j = 0; j <= n; ++j) d[j] = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      const std::uint32_t diag = d[(i - 1) * w + j - 1] + (r[i - 1] != h[j - 1]);
      const std::uint32_t del = d[(i - 1) * w + j] + 1;
      const std::uint32_t ins = d[i * w + j - 1] + 1;
      d[i * w + j] = std::min({diag, del, ins});
    }
  }

  EditCounts c;
  c.distance = d[m * w + n];
  c.ref_length = m;
  std::size_t i = m, j = n;
  while (i > 0 || j > 0) {
    const std::uint32_t cur = d[i * w + j];
    if (i > 0 && j > 0 &&
        cur == d[(i - 1) * w + j - 1] + (r[i - 1] != h[j - 1])) {
      c.substitutions += r[i - 1] != h[j - 1];
      --i;
      --j;
    } else if (i > 0 && cur == d[(i - 1) * w + j] + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

double error_rate(const EditCounts& c) {
  if (c.ref_length == 0)
    throw DivisionError("error rate undefined for an empty reference");
  return static_cast<double>(c.substitutions + c.insertions + c.deletions) /
         static_cast<double>(c.ref_length);
}

EditCounts& operator+=(EditCounts& a, const EditCounts& b) {
  a.distance += b.distance;
  a.substitutions += b.substitutions;
  a.insertions += b.insertions;
  a.deletions += b.deletions;
  a.ref_length += b.ref_length;
  return a;
}

std::map<std::string, std::string> parse_transcripts(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t cut = line.find('\t');
    if (cut == std::string::npos) cut = line.find(' ');
    std::string id = line.substr(0, cut);
    std::string tokens = cut == std::string::npos ? "" : line.substr(cut + 1);
    if (!out.emplace(id, tokens).second)
      throw FormatError("transcript line " + std::to_string(lineno) +
                        ": duplicate utterance id '" + id + "'");
  }
  return out;
}

std::map<std::string, std::string> read_transcripts(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open transcript file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_transcripts(ss.str());
}

}  // namespace artifree::metrics

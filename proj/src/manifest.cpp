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

#include "artifree/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "artifree/error.hpp"

namespace artifree::manifest {

using nlohmann::json;

std::string to_string(Role r) {
  switch (r) {
    case Role::kClean:
      return "clean";
    case Role::kNoisy:
      return "noisy";
    case Role::kCandidate:
      return "candidate";
  }
  return "unknown";
}

std::filesystem::path Manifest::resolve(const std::string& p) const {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

namespace {

template <typename T>
std::optional<T> OptField(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

Entry ParseEntry(const json& j) {
  if (!j.is_object()) throw FormatError("manifest line is not a JSON object");
  Entry e;
  e.utterance_id = j.at("utterance_id").get<std::string>();
  if (e.utterance_id.empty()) throw FormatError("empty utterance_id");
  const std::string role = j.at("role").get<std::string>();
  if (role == "clean") {
    e.role = Role::kClean;
  } else if (role == "noisy") {
    e.role = Role::kNoisy;
  } else if (role == "candidate") {
    e.role = Role::kCandidate;
    if (!j.contains("index")) throw FormatError("candidate entry without index");
  } else if (role.rfind("candidate_", 0) == 0) {
    e.role = Role::kCandidate;
    try {
      std::size_t used = 0;
      e.index = std::stoi(role.substr(10), &used);
      if (used != role.size() - 10) throw std::invalid_argument(role);
    } catch (const std::exception&) {
      throw FormatError("bad candidate role '" + role + "'");
    }
  } else {
    throw FormatError("unknown role '" + role + "'");
  }
  if (auto idx = OptField<int>(j, "index")) e.index = *idx;
  if (e.role == Role::kCandidate && e.index < 0)
    throw FormatError("candidate index must be >= 0");
  e.wav_path = OptField<std::string>(j, "wav_path");
  e.emb_path = OptField<std::string>(j, "emb_path");
  e.noise_path = OptField<std::string>(j, "noise_path");
  e.snr_db = OptField<double>(j, "snr_db");
  e.transcript_ref = OptField<std::string>(j, "transcript_ref");
  e.transcript_hyp = OptField<std::string>(j, "transcript_hyp");
  e.label = OptField<int>(j, "label");
  e.hallucinated = OptField<bool>(j, "hallucinated");
  return e;
}

}  // namespace

Manifest parse_manifest(const std::string& text,
                        const std::filesystem::path& base_dir,
                        bool check_paths) {
  Manifest m;
  m.base_dir = base_dir;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      m.entries.push_back(ParseEntry(json::parse(line)));
    } catch (const json::exception& e) {
      throw FormatError("manifest line " + std::to_string(lineno) + ": " +
                        e.what());
    } catch (const FormatError& e) {
      throw FormatError("manifest line " + std::to_string(lineno) + ": " +
                        e.what());
    }
  }
  if (check_paths) {
    for (const auto& e : m.entries) {
      for (const auto* p : {&e.wav_path, &e.emb_path, &e.noise_path}) {
        if (*p && !std::filesystem::exists(m.resolve(**p)))
          throw IoError("manifest references missing file " +
                        m.resolve(**p).string());
      }
    }
  }
  return m;
}

Manifest read_manifest(const std::filesystem::path& path, bool check_paths) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto base = path.parent_path();
  if (base.empty()) base = ".";
  return parse_manifest(ss.str(), base, check_paths);
}

std::string serialize_entry(const Entry& e) {
  // Insertion-ordered keys keep files diffable and byte-stable.
  nlohmann::ordered_json j;
  j["utterance_id"] = e.utterance_id;
  j["role"] = to_string(e.role);
  if (e.role == Role::kCandidate) j["index"] = e.index;
  if (e.wav_path) j["wav_path"] = *e.wav_path;
  if (e.emb_path) j["emb_path"] = *e.emb_path;
  if (e.noise_path) j["noise_path"] = *e.noise_path;
  if (e.snr_db) j["snr_db"] = *e.snr_db;
  if (e.transcript_ref) j["transcript_ref"] = *e.transcript_ref;
  if (e.transcript_hyp) j["transcript_hyp"] = *e.transcript_hyp;
  if (e.label) j["label"] = *e.label;
  if (e.hallucinated) j["hallucinated"] = *e.hallucinated;
  return j.dump();
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write manifest " + path.string());
  for (const auto& e : m.entries) out << serialize_entry(e) << '\n';
}

std::map<std::string, UtteranceGroup> group(const Manifest& m) {
  std::map<std::string, UtteranceGroup> out;
  for (const auto& e : m.entries) {
    auto& g = out[e.utterance_id];
    g.id = e.utterance_id;
    switch (e.role) {
      case Role::kClean:
        if (g.clean) throw FormatError("duplicate clean entry for " + g.id);
        g.clean = e;
        break;
      case Role::kNoisy:
        if (g.noisy) throw FormatError("duplicate noisy entry for " + g.id);
        g.noisy = e;
        break;
      case Role::kCandidate:
        g.candidates.push_back(e);
        break;
    }
  }
  for (auto& [id, g] : out) {
    std::sort(g.candidates.begin(), g.candidates.end(),
              [](const Entry& a, const Entry& b) { return a.index < b.index; });
    for (std::size_t i = 1; i < g.candidates.size(); ++i)
      if (g.candidates[i].index == g.candidates[i - 1].index)
        throw FormatError("duplicate candidate index " +
                          std::to_string(g.candidates[i].index) + " for " + id);
  }
  return out;
}

}  // namespace artifree::manifest

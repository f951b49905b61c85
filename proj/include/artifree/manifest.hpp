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

// Line-delimited JSON manifests tying utterances to their WAV and EMB1
// files. One JSON object per line:
//
//   {"utterance_id": "u01", "role": "candidate", "index": 2,
//    "wav_path": "u01/cand_2.wav", "emb_path": "u01/cand_2.emb", ...}
//
// role is clean | noisy | candidate; "candidate_<k>" is accepted as a
// shorthand for role=candidate, index=k. Relative paths resolve against the
// manifest's directory.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace artifree::manifest {

enum class Role { kClean, kNoisy, kCandidate };
std::string to_string(Role r);

struct Entry {
  std::string utterance_id;
  Role role = Role::kCandidate;
  int index = -1;  // candidates only
  std::optional<std::string> wav_path;
  std::optional<std::string> emb_path;
  std::optional<std::string> noise_path;  // simulate inputs
  std::optional<double> snr_db;
  std::optional<std::string> transcript_ref;
  std::optional<std::string> transcript_hyp;
  // Ground truth from the simulator: utterance-level artifact label (noisy
  // entry) and per-candidate hallucination flag.
  std::optional<int> label;
  std::optional<bool> hallucinated;
};

struct Manifest {
  std::filesystem::path base_dir;
  std::vector<Entry> entries;

  std::filesystem::path resolve(const std::string& p) const;
};

// Throws FormatError (with line number) on malformed lines and IoError when
// check_paths is set and a referenced file is missing.
Manifest read_manifest(const std::filesystem::path& path,
                       bool check_paths = true);
Manifest parse_manifest(const std::string& text,
                        const std::filesystem::path& base_dir,
                        bool check_paths = false);
std::string serialize_entry(const Entry& e);
void write_manifest(const Manifest& m, const std::filesystem::path& path);

struct UtteranceGroup {
  std::string id;
  std::optional<Entry> clean;
  std::optional<Entry> noisy;
  std::vector<Entry> candidates;  // sorted by index
};

// Groups by utterance_id, ordered by id. Duplicate clean/noisy roles or
// duplicate candidate indices throw FormatError.
std::map<std::string, UtteranceGroup> group(const Manifest& m);

}  // namespace artifree::manifest

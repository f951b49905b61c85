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

#pragma once

#include <array>

namespace fixture {

// Reference transcript and seven hypotheses with hallucinated word edits.
inline constexpr const char* kTranscriptRef =
    "THEY DID NOT REPLACE IT WITH A CONVICTION FOR CULPABLE HOMICIDE";
inline constexpr std::array<const char*, 7> kTranscriptHyps{
    "THEY DID NOT REPLACE IT WITH A CONVICTION FOR PHELPOVAL HOMICIDE",
    "THEY DID NOT REPLACE IT WITH HE CONVICTION FOR FELFOBLE VOMECIDE",
    "THEY DID NOT REPLACE IT WITH THE CONVICTION PORCOPOVAL HOMICIDE",
    "THEY DID NOT REPLACE IT WITH THE CONVICTION FOR PULPABLE HOMICIDE",
    "THEY DID NOT REPLACE IT WITH A CONVICTION FOR COPOVEL HOMECADE",
    "THEY DID NOT REPLACE IT WITH A CONVICTION FOR CULPABLE HOMECIDE",
    "THEY DID NOT REPLACE IT WITH HE CONVICTION FOR CULPRABAL VOMECIDE",
};

}  // namespace fixture

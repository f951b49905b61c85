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

#include <stdexcept>
#include <string>

namespace artifree {

/// Base of every error raised by the library. `kind()` is a stable,
/// machine-parsable tag used by the CLI error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define ARTIFREE_DEFINE_ERROR(Name, tag)                         \
  class Name : public Error {                                    \
   public:                                                       \
    explicit Name(const std::string& what) : Error(tag, what) {} \
  };

// Malformed files (WAV, EMB1, manifests, CSV).
ARTIFREE_DEFINE_ERROR(FormatError, "format")
ARTIFREE_DEFINE_ERROR(UnsupportedError, "unsupported")
// Inputs too short for the requested framing, or empty where data is needed.
ARTIFREE_DEFINE_ERROR(SizeError, "size")
// Zero-power signals where a power ratio is required.
ARTIFREE_DEFINE_ERROR(DegenerateSignalError, "degenerate-signal")
// Mismatched shapes, rates, dimensions or hops.
ARTIFREE_DEFINE_ERROR(IncompatibleError, "incompatible")
ARTIFREE_DEFINE_ERROR(EnsembleSizeError, "ensemble-size")
ARTIFREE_DEFINE_ERROR(CalibrationError, "calibration")
ARTIFREE_DEFINE_ERROR(SelectionError, "selection")
// Rates over an empty reference.
ARTIFREE_DEFINE_ERROR(DivisionError, "division")
// Invalid argument values (NaN, out-of-range configuration).
ARTIFREE_DEFINE_ERROR(InputError, "input")
ARTIFREE_DEFINE_ERROR(IoError, "io")

#undef ARTIFREE_DEFINE_ERROR

}  // namespace artifree

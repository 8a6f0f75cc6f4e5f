// Copyright 2026 The MPSI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include "mpsi/harness.h"
#include "mpsi/params.h"

namespace mpsi::golden {

// The fixed session behind tests/data/golden_transcript.txt.
inline constexpr uint64_t kSeed = 20261016;

inline std::vector<std::vector<Element>> Sets() {
  std::vector<std::vector<Element>> sets(3);
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 5; ++k) sets[i].push_back("shared-" + std::to_string(k));
    for (int k = 0; k < 6 + 2 * i; ++k) {
      sets[i].push_back("p" + std::to_string(i + 1) + "-" + std::to_string(k));
    }
  }
  return sets;
}

inline ProtocolParams Params() { return DeriveParams(16, 3); }

inline SimReport Run() {
  SimOptions opt;
  opt.rot_mode = RotMode::kDealer;
  opt.seed = kSeed;
  opt.record_transcript = true;
  return Simulate(Sets(), Params(), opt);
}

}  // namespace mpsi::golden

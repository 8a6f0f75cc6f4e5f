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

#include <cstdint>
#include <string>
#include <string_view>

namespace mpsi {

// Security knobs shared by every party. `d` is the minimum Hamming weight a
// non-member's selected occupancy bits must reach; it defaults to lambda.
struct SecurityConfig {
  uint32_t lambda = 128;
  uint32_t sigma = 40;
  uint32_t d = 128;

  // Throws std::invalid_argument unless lambda >= 80, sigma >= 30, d >= 1.
  void Validate() const;

  bool operator==(const SecurityConfig&) const = default;
};

struct ProtocolParams {
  uint32_t n = 0;         // party count
  uint64_t set_size = 0;  // N, upper bound on every party's set
  uint64_t m = 0;         // matrix rows
  uint32_t w = 0;         // matrix columns == OT count
  uint32_t ell1 = 0;      // H1 output bits
  uint32_t ell2 = 0;      // H2 output bits
  SecurityConfig sec;

  size_t column_bytes() const { return static_cast<size_t>((m + 7) / 8); }
  size_t matrix_bytes() const { return column_bytes() * w; }
  size_t oprf_bytes() const { return (ell2 + 7) / 8; }
  size_t key_bytes() const { return (sec.lambda + 7) / 8; }

  // Canonical text form: one `name=value` per line, names sorted, trailing
  // newline. Two parties agree iff their serializations are byte-identical.
  std::string Serialize() const;
  static ProtocolParams Parse(std::string_view text);

  bool operator==(const ProtocolParams&) const = default;
};

// Names the first field that differs, e.g. "w: 597 != 598". Empty if equal.
std::string DescribeMismatch(const ProtocolParams& ours,
                             const ProtocolParams& theirs);

// (1 - 1/m)^set_size: the chance a given row of a column stays 1 after
// set_size uniform zeroings.
double OccupancyProbability(uint64_t m, uint64_t set_size);

// Natural log of N * BinomialCDF(d - 1; w, p) with p = OccupancyProbability(m,
// N). Evaluated entirely in log space.
double LogTailBound(uint32_t w, uint64_t set_size, uint64_t m,
                    const SecurityConfig& sec);

// True iff N * BinomialCDF(d - 1; w, p) <= 2^-sigma.
bool CheckWBound(uint32_t w, uint64_t set_size, uint64_t m,
                 const SecurityConfig& sec);

// Upper limit for the column search; beyond it the configuration is treated
// as infeasible.
inline constexpr uint32_t kMaxColumns = 1u << 20;

// m = N, ell1 = 2 lambda, ell2 = ceil(sigma + 2 log2 N), w minimal under
// CheckWBound. Throws std::invalid_argument on bad inputs and
// std::runtime_error if no w <= kMaxColumns works.
ProtocolParams DeriveParams(uint64_t set_size, uint32_t n,
                            const SecurityConfig& sec = {});

// Same as DeriveParams but without the search; useful when w is pinned.
uint32_t MinimalColumns(uint64_t set_size, uint64_t m,
                        const SecurityConfig& sec);

}  // namespace mpsi

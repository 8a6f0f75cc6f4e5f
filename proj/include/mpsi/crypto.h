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
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mpsi/bit_matrix.h"
#include "mpsi/params.h"

namespace mpsi {

class Prng;

// Set elements are opaque byte strings. No canonicalization happens before
// hashing; callers normalize text themselves.
using Element = std::string;

inline std::span<const uint8_t> AsBytes(std::string_view s) {
  return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

// The lambda-bit key of the index PRF, known to every party.
class PrfKey {
 public:
  PrfKey() = default;
  PrfKey(uint32_t bits, std::vector<uint8_t> bytes);

  static PrfKey Random(uint32_t bits, Prng& prng);

  uint32_t bits() const { return bits_; }
  std::span<const uint8_t> bytes() const { return bytes_; }

  bool operator==(const PrfKey&) const = default;

 private:
  uint32_t bits_ = 0;
  std::vector<uint8_t> bytes_;
};

// An ell2-bit H2 digest in ceil(ell2 / 8) bytes with zero pad bits.
class OprfValue {
 public:
  OprfValue() = default;
  OprfValue(uint32_t bits, std::string bytes);

  uint32_t bits() const { return bits_; }
  const std::string& bytes() const { return bytes_; }

  bool operator==(const OprfValue&) const = default;

 private:
  uint32_t bits_ = 0;
  std::string bytes_;
};

struct OprfValueHash {
  size_t operator()(const OprfValue& v) const {
    return std::hash<std::string>{}(v.bytes());
  }
};

// F_k: digest -> [m]^w. Instances keep cipher state and are not thread-safe;
// build one per thread.
class IndexPrf {
 public:
  virtual ~IndexPrf() = default;
  virtual IndexVector Eval(std::span<const uint8_t> digest) const = 0;
};

// All hash, PRF and PRG primitives sit behind this interface. Any
// replacement must reproduce tests/data/crypto_vectors.txt to interoperate.
class CryptoSuite {
 public:
  virtual ~CryptoSuite() = default;

  virtual std::vector<uint8_t> H1(std::span<const uint8_t> element,
                                  uint32_t ell1) const = 0;
  virtual OprfValue H2(const BitString& bits, uint32_t ell2) const = 0;
  virtual std::unique_ptr<IndexPrf> NewIndexPrf(const PrfKey& key, uint64_t m,
                                                uint32_t w) const = 0;
  virtual std::vector<uint8_t> PrgExpand(std::span<const uint8_t> seed,
                                         uint64_t bits) const = 0;
};

// SHAKE256 for H1/H2 (tag bytes 0x01/0x02), AES-256 CBC-MAC + CTR for F,
// AES-256-CTR for the PRG.
const CryptoSuite& DefaultSuite();

// Convenience wrappers over DefaultSuite().
std::vector<uint8_t> H1(std::span<const uint8_t> element, uint32_t ell1);
// Throws std::invalid_argument unless bits.size() == params.w.
OprfValue H2(const BitString& bits, const ProtocolParams& params);
IndexVector PrfIndices(const PrfKey& key, std::span<const uint8_t> digest,
                       const ProtocolParams& params);
std::vector<uint8_t> PrgExpand(std::span<const uint8_t> seed, uint64_t bits);

std::string ToHex(std::span<const uint8_t> bytes);
std::vector<uint8_t> FromHex(std::string_view hex);

}  // namespace mpsi

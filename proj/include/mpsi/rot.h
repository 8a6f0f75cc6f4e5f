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
#include <memory>
#include <string>

#include "mpsi/bit_matrix.h"
#include "mpsi/crypto.h"
#include "mpsi/transport.h"

namespace mpsi {

class Prng;

enum class RotMode : uint8_t {
  // Sender ships a dealer seed in the clear and both sides expand it. Not
  // secure; exists for tests, simulation and golden transcripts.
  kDealer = 1,
  // w base OTs (Chou-Orlandi over ristretto255) on lambda-bit seeds, each
  // seed PRG-expanded to an m-bit column.
  kSeedOt = 2,
};

const char* RotModeName(RotMode mode);
RotMode ParseRotMode(const std::string& text);

// Sender side of w random OTs: pairs (r0_j, r1_j) as the columns of R0, R1.
struct RotSenderBatch {
  BitMatrix r0;
  BitMatrix r1;
};

// Receiver side: column j of r is r_j^{choices[j]}.
struct RotReceiverBatch {
  BitMatrix r;
  ChoiceString choices;
};

class RotProvider {
 public:
  virtual ~RotProvider() = default;

  virtual RotMode mode() const = 0;
  // Width of one group element on the wire; 0 when none are sent.
  virtual size_t element_bytes() const = 0;

  virtual RotSenderBatch Send(Channel& channel, uint32_t w, uint64_t m,
                              Prng& prng) = 0;
  virtual RotReceiverBatch Receive(Channel& channel, const ChoiceString& choices,
                                   uint64_t m, Prng& prng) = 0;
};

std::unique_ptr<RotProvider> MakeRotProvider(RotMode mode, uint32_t lambda,
                                             const CryptoSuite& suite = DefaultSuite());

}  // namespace mpsi

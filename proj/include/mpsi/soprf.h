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

#include <span>
#include <vector>

#include "mpsi/bit_matrix.h"
#include "mpsi/crypto.h"
#include "mpsi/params.h"
#include "mpsi/rot.h"
#include "mpsi/transport.h"

namespace mpsi {

// D^i: all ones except a zero at (v[j], j) for every element and column.
struct OccupancyMatrix {
  BitMatrix d;
};

// A party's received hop result C^i and the choice bits used to get it.
struct WheelState {
  BitMatrix c;
  ChoiceString s;
};

// v = F_k(H1(x)) for every element, in input order.
std::vector<IndexVector> DeriveIndices(std::span<const Element> set, const PrfKey& key,
                                       const ProtocolParams& params,
                                       const CryptoSuite& suite = DefaultSuite());

OccupancyMatrix BuildOccupancy(std::span<const IndexVector> indices,
                               const ProtocolParams& params);
// Throws std::invalid_argument if the set holds more than N elements.
OccupancyMatrix BuildOccupancy(std::span<const Element> set, const PrfKey& key,
                               const ProtocolParams& params);

// Channel-free hop algebra.
struct FirstHopMessage {
  BitMatrix a;      // A = R0, kept by the leader
  BitMatrix delta;  // (A ^ D1) ^ R1
};
FirstHopMessage ComputeFirstHop(const OccupancyMatrix& d1, const RotSenderBatch& rot);
// C_j = r_j if s[j] == 0 else r_j ^ delta_j.
BitMatrix ReconstructFirstHop(const RotReceiverBatch& rot, const BitMatrix& delta);

struct MiddleHopMessage {
  BitMatrix gamma;  // R0 ^ C
  BitMatrix delta;  // R1 ^ (C ^ D)
};
MiddleHopMessage ComputeMiddleHop(const WheelState& state, const OccupancyMatrix& di,
                                  const RotSenderBatch& rot);
// C_j = r_j ^ gamma_j if s[j] == 0 else r_j ^ delta_j.
BitMatrix ReconstructMiddleHop(const RotReceiverBatch& rot, const BitMatrix& gamma,
                               const BitMatrix& delta);

// Networked hops. The ROT batches must already be complete.
BitMatrix LeaderFirstHop(const OccupancyMatrix& d1, const RotSenderBatch& rot,
                         Channel& next);
WheelState ReceiveFirstHop(const RotReceiverBatch& rot, Channel& prev,
                           const ProtocolParams& params);
void MiddleHopSend(const WheelState& state, const OccupancyMatrix& di,
                   const RotSenderBatch& rot, Channel& next);
WheelState MiddleHopReceive(const RotReceiverBatch& rot, Channel& prev,
                            const ProtocolParams& params);

// H2(gather(matrix, v)) per element, in input order.
std::vector<OprfValue> EvalOprf(const BitMatrix& matrix,
                                std::span<const IndexVector> indices,
                                const ProtocolParams& params,
                                const CryptoSuite& suite = DefaultSuite());
std::vector<OprfValue> EvalOprf(const BitMatrix& matrix, const PrfKey& key,
                                std::span<const Element> set,
                                const ProtocolParams& params);

}  // namespace mpsi

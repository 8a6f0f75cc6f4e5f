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

#include "mpsi/soprf.h"

#include <stdexcept>
#include <string>

namespace mpsi {
namespace {

Frame Expect(Channel& channel, MsgType type) {
  Frame f = channel.RecvMessage(type);
  if (f.type == MsgType::kAbort) {
    throw ProtocolError("peer aborted: " +
                        std::string(f.payload.begin(), f.payload.end()));
  }
  return f;
}

}  // namespace

std::vector<IndexVector> DeriveIndices(std::span<const Element> set, const PrfKey& key,
                                       const ProtocolParams& params,
                                       const CryptoSuite& suite) {
  auto prf = suite.NewIndexPrf(key, params.m, params.w);
  std::vector<IndexVector> out;
  out.reserve(set.size());
  for (const auto& x : set) {
    out.push_back(prf->Eval(suite.H1(AsBytes(x), params.ell1)));
  }
  return out;
}

OccupancyMatrix BuildOccupancy(std::span<const IndexVector> indices,
                               const ProtocolParams& params) {
  if (indices.size() > params.set_size) {
    throw std::invalid_argument("set has " + std::to_string(indices.size()) +
                                " elements, more than N = " +
                                std::to_string(params.set_size));
  }
  BitMatrix d = BitMatrix::Filled(params.m, params.w, true);
  for (const auto& v : indices) {
    for (size_t j = 0; j < params.w; ++j) d.Set(v[j], j, false);
  }
  return {std::move(d)};
}

OccupancyMatrix BuildOccupancy(std::span<const Element> set, const PrfKey& key,
                               const ProtocolParams& params) {
  if (set.size() > params.set_size) {
    throw std::invalid_argument("set larger than N");
  }
  auto indices = DeriveIndices(set, key, params);
  return BuildOccupancy(indices, params);
}

FirstHopMessage ComputeFirstHop(const OccupancyMatrix& d1, const RotSenderBatch& rot) {
  BitMatrix a = rot.r0;
  BitMatrix delta = a ^ d1.d;
  delta ^= rot.r1;
  return {std::move(a), std::move(delta)};
}

BitMatrix ReconstructFirstHop(const RotReceiverBatch& rot, const BitMatrix& delta) {
  return Mux(rot.r, rot.r ^ delta, rot.choices);
}

MiddleHopMessage ComputeMiddleHop(const WheelState& state, const OccupancyMatrix& di,
                                  const RotSenderBatch& rot) {
  BitMatrix e = state.c ^ di.d;
  return {rot.r0 ^ state.c, rot.r1 ^ e};
}

BitMatrix ReconstructMiddleHop(const RotReceiverBatch& rot, const BitMatrix& gamma,
                               const BitMatrix& delta) {
  return Mux(rot.r ^ gamma, rot.r ^ delta, rot.choices);
}

BitMatrix LeaderFirstHop(const OccupancyMatrix& d1, const RotSenderBatch& rot,
                         Channel& next) {
  FirstHopMessage msg = ComputeFirstHop(d1, rot);
  next.SendMessage(MsgType::kDelta, msg.delta.bytes());
  return std::move(msg.a);
}

WheelState ReceiveFirstHop(const RotReceiverBatch& rot, Channel& prev,
                           const ProtocolParams& params) {
  Frame f = Expect(prev, MsgType::kDelta);
  if (f.payload.size() != params.matrix_bytes()) {
    throw ProtocolError("DELTA payload is " + std::to_string(f.payload.size()) +
                        " bytes, expected " + std::to_string(params.matrix_bytes()));
  }
  BitMatrix delta = BitMatrix::FromBytes(params.m, params.w, std::move(f.payload));
  return {ReconstructFirstHop(rot, delta), rot.choices};
}

void MiddleHopSend(const WheelState& state, const OccupancyMatrix& di,
                   const RotSenderBatch& rot, Channel& next) {
  MiddleHopMessage msg = ComputeMiddleHop(state, di, rot);
  // Gamma then Delta, one message.
  std::vector<uint8_t> payload;
  payload.reserve(msg.gamma.bytes().size() + msg.delta.bytes().size());
  payload.insert(payload.end(), msg.gamma.bytes().begin(), msg.gamma.bytes().end());
  payload.insert(payload.end(), msg.delta.bytes().begin(), msg.delta.bytes().end());
  next.SendMessage(MsgType::kGammaDelta, payload);
}

WheelState MiddleHopReceive(const RotReceiverBatch& rot, Channel& prev,
                            const ProtocolParams& params) {
  Frame f = Expect(prev, MsgType::kGammaDelta);
  const size_t half = params.matrix_bytes();
  if (f.payload.size() != 2 * half) {
    throw ProtocolError("GAMMA_DELTA payload is " + std::to_string(f.payload.size()) +
                        " bytes, expected " + std::to_string(2 * half));
  }
  BitMatrix gamma = BitMatrix::FromBytes(
      params.m, params.w, std::vector<uint8_t>(f.payload.begin(), f.payload.begin() + half));
  BitMatrix delta = BitMatrix::FromBytes(
      params.m, params.w, std::vector<uint8_t>(f.payload.begin() + half, f.payload.end()));
  return {ReconstructMiddleHop(rot, gamma, delta), rot.choices};
}

std::vector<OprfValue> EvalOprf(const BitMatrix& matrix,
                                std::span<const IndexVector> indices,
                                const ProtocolParams& params,
                                const CryptoSuite& suite) {
  if (matrix.rows() != params.m || matrix.cols() != params.w) {
    throw std::invalid_argument("OPRF matrix does not match params");
  }
  std::vector<OprfValue> out;
  out.reserve(indices.size());
  for (const auto& v : indices) {
    out.push_back(suite.H2(Gather(matrix, v), params.ell2));
  }
  return out;
}

std::vector<OprfValue> EvalOprf(const BitMatrix& matrix, const PrfKey& key,
                                std::span<const Element> set,
                                const ProtocolParams& params) {
  auto indices = DeriveIndices(set, key, params);
  return EvalOprf(matrix, indices, params);
}

}  // namespace mpsi

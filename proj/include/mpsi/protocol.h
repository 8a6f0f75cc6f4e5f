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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpsi/bit_matrix.h"
#include "mpsi/crypto.h"
#include "mpsi/params.h"
#include "mpsi/rot.h"
#include "mpsi/transport.h"

namespace mpsi {

class Prng;

enum class PartyRole { kLeader, kMiddle, kTerminal };

PartyRole RoleFor(uint32_t index, uint32_t n);
const char* RoleName(PartyRole role);

// Internal state a party exposes to an in-process observer. Only the
// simulator and tests install observers; nothing here goes on the wire.
struct PartyTrace {
  uint32_t index = 0;
  std::optional<BitMatrix> a;     // leader's A
  std::optional<BitMatrix> d;     // D^i, parties 1..n-1
  std::optional<BitMatrix> c;     // C^i, parties 2..n
  std::optional<ChoiceString> s;  // s_i, parties 2..n
};

struct PartyConfig {
  uint32_t index = 1;
  ProtocolParams params;
  RotMode rot_mode = RotMode::kDealer;
  // Fixed seed for the party's generator; OS randomness otherwise.
  std::optional<uint64_t> seed;

  // Test hooks.
  std::function<void(const PartyTrace&)> observer;
  std::optional<ChoiceString> forced_choices;
  std::optional<std::string> fail_at_phase;

  PartyRole role() const { return RoleFor(index, params.n); }
  void Validate() const;
};

// Borrowed channels. Leader: next + leader_return. Middle: prev + next.
// Terminal: prev + leader_return.
struct PartyChannels {
  Channel* prev = nullptr;
  Channel* next = nullptr;
  Channel* leader_return = nullptr;
};

struct PhaseTiming {
  std::string name;
  double millis = 0;
};

struct PartyMetrics {
  uint32_t index = 0;
  ChannelMetrics prev;
  ChannelMetrics next;
  ChannelMetrics leader_return;
  std::vector<PhaseTiming> phases;

  ChannelMetrics Total() const;
  // Wire bytes of DELTA and GAMMA_DELTA frames sent.
  uint64_t WheelBytesSent() const;
};

struct IntersectionResult {
  std::vector<Element> elements;  // subset of X_1, in X_1 order
  PartyMetrics metrics;
};

// Real elements first (deduplicated, original order), then fresh random
// 2 lambda-bit fillers up to N. Throws if more than N distinct elements.
struct PaddedSet {
  std::vector<Element> elements;
  size_t real_count = 0;
};
PaddedSet PadSet(std::span<const Element> set, uint64_t set_size, uint32_t lambda,
                 Prng& prng);

// First frame on every channel.
struct SessionHeader {
  static constexpr char kMagic[4] = {'M', 'P', 'S', 'I'};
  static constexpr uint16_t kVersion = 1;

  uint32_t from = 0;
  uint32_t to = 0;
  RotMode rot_mode = RotMode::kDealer;
  uint16_t ot_element_bytes = 0;
  std::string params_text;

  std::vector<uint8_t> Encode() const;
  static SessionHeader Decode(std::span<const uint8_t> bytes);
};

// Exchanges session headers on every channel, checks params agreement, then
// moves k around the ring: the leader samples it, everyone else receives it
// from prev and forwards it to next.
PrfKey KeyShare(const PartyConfig& cfg, const PartyChannels& channels, Prng& prng);

IntersectionResult RunLeader(std::span<const Element> set, const PartyConfig& cfg,
                             const PartyChannels& channels);
PartyMetrics RunMiddleAssistant(std::span<const Element> set, const PartyConfig& cfg,
                                const PartyChannels& channels);
PartyMetrics RunTerminalAssistant(std::span<const Element> set, const PartyConfig& cfg,
                                  const PartyChannels& channels);

// Dispatches on cfg.role(). Only the leader's result has elements.
IntersectionResult RunParty(std::span<const Element> set, const PartyConfig& cfg,
                            const PartyChannels& channels);

}  // namespace mpsi

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

#include "mpsi/protocol.h"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cstring>
#include <future>
#include <stdexcept>
#include <unordered_set>

#include "mpsi/prng.h"
#include "mpsi/soprf.h"

namespace mpsi {
namespace {

class PhaseClock {
 public:
  PhaseClock(const PartyConfig& cfg, std::vector<PhaseTiming>& out)
      : cfg_(cfg), out_(out) {}

  void Begin(const char* name) {
    End();
    if (cfg_.fail_at_phase && *cfg_.fail_at_phase == name) {
      throw std::runtime_error(std::string("injected failure at phase ") + name);
    }
    current_ = name;
    start_ = std::chrono::steady_clock::now();
    SPDLOG_DEBUG("party {}: phase {}", cfg_.index, name);
  }

  void End() {
    if (current_.empty()) return;
    std::chrono::duration<double, std::milli> d =
        std::chrono::steady_clock::now() - start_;
    out_.push_back({current_, d.count()});
    current_.clear();
  }

 private:
  const PartyConfig& cfg_;
  std::vector<PhaseTiming>& out_;
  std::string current_;
  std::chrono::steady_clock::time_point start_;
};

Prng MakePrng(const PartyConfig& cfg) {
  return cfg.seed ? Prng::FromSeed(*cfg.seed, cfg.index) : Prng::FromOs();
}

std::vector<Channel*> AllChannels(const PartyChannels& ch) {
  std::vector<Channel*> out;
  for (Channel* c : {ch.prev, ch.next, ch.leader_return}) {
    if (c != nullptr) out.push_back(c);
  }
  return out;
}

// On any failure: tell every neighbor, drop the links, rethrow. Neighbors
// then fail the same way, so an abort sweeps the whole ring.
template <typename Body>
auto Guarded(const PartyConfig& cfg, const PartyChannels& ch, Body&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    SPDLOG_WARN("party {} aborting: {}", cfg.index, e.what());
    std::string reason = e.what();
    for (Channel* c : AllChannels(ch)) {
      try {
        c->SendFrame(MsgType::kAbort, AsBytes(reason));
      } catch (...) {
      }
      c->Close();
    }
    throw;
  }
}

Frame Expect(Channel& channel, MsgType type) {
  Frame f = channel.RecvMessage(type);
  if (f.type == MsgType::kAbort) {
    throw ProtocolError("peer aborted: " +
                        std::string(f.payload.begin(), f.payload.end()));
  }
  return f;
}

void PutLe(std::vector<uint8_t>& out, uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint64_t GetLe(std::span<const uint8_t> in, size_t& pos, int bytes) {
  if (pos + bytes > in.size()) throw ProtocolError("session header truncated");
  uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | in[pos + i];
  pos += bytes;
  return v;
}

void RequireChannels(const PartyConfig& cfg, const PartyChannels& ch) {
  switch (cfg.role()) {
    case PartyRole::kLeader:
      if (!ch.next || !ch.leader_return) {
        throw std::invalid_argument("leader needs next and leader-return channels");
      }
      break;
    case PartyRole::kMiddle:
      if (!ch.prev || !ch.next) {
        throw std::invalid_argument("middle assistant needs prev and next channels");
      }
      break;
    case PartyRole::kTerminal:
      if (!ch.prev || !ch.leader_return) {
        throw std::invalid_argument("terminal assistant needs prev and leader-return");
      }
      break;
  }
}

PartyMetrics Snapshot(const PartyConfig& cfg, const PartyChannels& ch,
                      std::vector<PhaseTiming> phases) {
  PartyMetrics m;
  m.index = cfg.index;
  if (ch.prev) m.prev = ch.prev->metrics();
  if (ch.next) m.next = ch.next->metrics();
  if (ch.leader_return) m.leader_return = ch.leader_return->metrics();
  m.phases = std::move(phases);
  return m;
}

// Success path. Waits for the party we last sent to to finish and close, so
// a failure further along the ring still fails us, then drops every link.
void Finish(const PartyChannels& ch, Channel* downstream) {
  if (downstream) downstream->AwaitPeerClose();
  for (Channel* c : AllChannels(ch)) c->Close();
}

// Runs the sender batch towards `next` and the receiver batch from `prev`
// concurrently; they use disjoint channels and forked generators.
std::pair<RotSenderBatch, RotReceiverBatch> RunBothRots(
    RotProvider& rot, const PartyConfig& cfg, const PartyChannels& ch,
    const ChoiceString& s, Prng& prng) {
  Prng send_prng = prng.Fork();
  Prng recv_prng = prng.Fork();
  auto sender = std::async(std::launch::async, [&] {
    return rot.Send(*ch.next, cfg.params.w, cfg.params.m, send_prng);
  });
  RotReceiverBatch received;
  try {
    received = rot.Receive(*ch.prev, s, cfg.params.m, recv_prng);
  } catch (...) {
    ch.next->Close();
    sender.wait();
    throw;
  }
  return {sender.get(), std::move(received)};
}

ChoiceString SampleChoices(const PartyConfig& cfg, Prng& prng) {
  if (cfg.forced_choices) {
    if (cfg.forced_choices->size() != cfg.params.w) {
      throw std::invalid_argument("forced choice string has wrong length");
    }
    return *cfg.forced_choices;
  }
  return ChoiceString::Random(cfg.params.w, prng);
}

}  // namespace

PartyRole RoleFor(uint32_t index, uint32_t n) {
  if (n < 2 || index < 1 || index > n) {
    throw std::invalid_argument("party index " + std::to_string(index) +
                                " outside 1.." + std::to_string(n));
  }
  if (index == 1) return PartyRole::kLeader;
  if (index == n) return PartyRole::kTerminal;
  return PartyRole::kMiddle;
}

const char* RoleName(PartyRole role) {
  switch (role) {
    case PartyRole::kLeader: return "leader";
    case PartyRole::kMiddle: return "middle";
    case PartyRole::kTerminal: return "terminal";
  }
  return "?";
}

void PartyConfig::Validate() const {
  (void)RoleFor(index, params.n);
  if (params.w == 0 || params.m == 0 || params.set_size == 0) {
    throw std::invalid_argument("params are not initialized");
  }
}

ChannelMetrics PartyMetrics::Total() const {
  ChannelMetrics total = prev;
  total += next;
  total += leader_return;
  return total;
}

uint64_t PartyMetrics::WheelBytesSent() const {
  ChannelMetrics t = Total();
  return t.SentOf(MsgType::kDelta) + t.SentOf(MsgType::kGammaDelta);
}

PaddedSet PadSet(std::span<const Element> set, uint64_t set_size, uint32_t lambda,
                 Prng& prng) {
  PaddedSet out;
  std::unordered_set<Element> seen;
  for (const auto& x : set) {
    if (seen.insert(x).second) out.elements.push_back(x);
  }
  if (out.elements.size() > set_size) {
    throw std::invalid_argument("set has " + std::to_string(out.elements.size()) +
                                " distinct elements, more than N = " +
                                std::to_string(set_size));
  }
  out.real_count = out.elements.size();
  const size_t filler_bytes = (2 * lambda + 7) / 8;
  while (out.elements.size() < set_size) {
    auto bytes = prng.Bytes(filler_bytes);
    out.elements.emplace_back(bytes.begin(), bytes.end());
  }
  return out;
}

std::vector<uint8_t> SessionHeader::Encode() const {
  std::vector<uint8_t> out(kMagic, kMagic + 4);
  PutLe(out, kVersion, 2);
  PutLe(out, from, 4);
  PutLe(out, to, 4);
  PutLe(out, static_cast<uint8_t>(rot_mode), 1);
  PutLe(out, ot_element_bytes, 2);
  PutLe(out, params_text.size(), 4);
  out.insert(out.end(), params_text.begin(), params_text.end());
  return out;
}

SessionHeader SessionHeader::Decode(std::span<const uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ProtocolError("bad session magic");
  }
  size_t pos = 4;
  if (GetLe(bytes, pos, 2) != kVersion) throw ProtocolError("unsupported protocol version");
  SessionHeader h;
  h.from = static_cast<uint32_t>(GetLe(bytes, pos, 4));
  h.to = static_cast<uint32_t>(GetLe(bytes, pos, 4));
  uint8_t mode = static_cast<uint8_t>(GetLe(bytes, pos, 1));
  if (mode != 1 && mode != 2) throw ProtocolError("unknown ROT mode in header");
  h.rot_mode = static_cast<RotMode>(mode);
  h.ot_element_bytes = static_cast<uint16_t>(GetLe(bytes, pos, 2));
  size_t len = GetLe(bytes, pos, 4);
  if (pos + len != bytes.size()) throw ProtocolError("session header length mismatch");
  h.params_text.assign(bytes.begin() + pos, bytes.end());
  return h;
}

PrfKey KeyShare(const PartyConfig& cfg, const PartyChannels& ch, Prng& prng) {
  const uint32_t n = cfg.params.n;
  const uint32_t i = cfg.index;
  auto rot = MakeRotProvider(cfg.rot_mode, cfg.params.sec.lambda);
  const std::string text = cfg.params.Serialize();

  struct Link {
    Channel* channel;
    uint32_t peer;
  };
  std::vector<Link> links;
  if (ch.prev) links.push_back({ch.prev, i - 1});
  if (ch.next) links.push_back({ch.next, i + 1});
  if (ch.leader_return) links.push_back({ch.leader_return, i == 1 ? n : 1});

  for (const auto& link : links) {
    SessionHeader h{i, link.peer, cfg.rot_mode,
                    static_cast<uint16_t>(rot->element_bytes()), text};
    link.channel->SendMessage(MsgType::kParams, h.Encode());
  }
  for (const auto& link : links) {
    Frame f = Expect(*link.channel, MsgType::kParams);
    SessionHeader h = SessionHeader::Decode(f.payload);
    if (h.from != link.peer || h.to != i) {
      throw ProtocolError("ring wiring mismatch: expected party " +
                          std::to_string(link.peer) + " -> " + std::to_string(i) +
                          ", got " + std::to_string(h.from) + " -> " +
                          std::to_string(h.to));
    }
    if (h.rot_mode != cfg.rot_mode) {
      throw ProtocolError(std::string("ROT mode mismatch with party ") +
                          std::to_string(h.from) + ": " + RotModeName(cfg.rot_mode) +
                          " != " + RotModeName(h.rot_mode));
    }
    if (h.ot_element_bytes != rot->element_bytes()) {
      throw ProtocolError("OT element width mismatch");
    }
    if (h.params_text != text) {
      ProtocolParams theirs = ProtocolParams::Parse(h.params_text);
      throw ProtocolError("params mismatch with party " + std::to_string(h.from) +
                          ": " + DescribeMismatch(cfg.params, theirs));
    }
  }

  PrfKey key;
  if (cfg.role() == PartyRole::kLeader) {
    key = PrfKey::Random(cfg.params.sec.lambda, prng);
  } else {
    Frame f = Expect(*ch.prev, MsgType::kKey);
    key = PrfKey(cfg.params.sec.lambda, std::move(f.payload));
  }
  if (ch.next) ch.next->SendMessage(MsgType::kKey, key.bytes());
  return key;
}

IntersectionResult RunLeader(std::span<const Element> set, const PartyConfig& cfg,
                             const PartyChannels& ch) {
  cfg.Validate();
  if (cfg.role() != PartyRole::kLeader) throw std::invalid_argument("not the leader");
  RequireChannels(cfg, ch);
  return Guarded(cfg, ch, [&] {
    const auto& params = cfg.params;
    std::vector<PhaseTiming> phases;
    PhaseClock clock(cfg, phases);
    Prng prng = MakePrng(cfg);
    auto rot = MakeRotProvider(cfg.rot_mode, params.sec.lambda);

    clock.Begin("handshake");
    PrfKey key = KeyShare(cfg, ch, prng);

    clock.Begin("preprocess");
    PaddedSet padded = PadSet(set, params.set_size, params.sec.lambda, prng);
    auto indices = DeriveIndices(padded.elements, key, params);
    OccupancyMatrix d1 = BuildOccupancy(indices, params);

    clock.Begin("rot");
    Prng rot_prng = prng.Fork();
    RotSenderBatch batch = rot->Send(*ch.next, params.w, params.m, rot_prng);

    clock.Begin("wheel");
    BitMatrix a = LeaderFirstHop(d1, batch, *ch.next);
    if (cfg.observer) cfg.observer(PartyTrace{cfg.index, a, d1.d, {}, {}});

    clock.Begin("output");
    Frame f = Expect(*ch.leader_return, MsgType::kPsi);
    const size_t width = params.oprf_bytes();
    if (f.payload.size() != params.set_size * width) {
      throw ProtocolError("PSI carries " + std::to_string(f.payload.size()) +
                          " bytes, expected N * " + std::to_string(width));
    }
    std::unordered_set<OprfValue, OprfValueHash> psi;
    psi.reserve(params.set_size);
    for (size_t off = 0; off < f.payload.size(); off += width) {
      psi.emplace(params.ell2,
                  std::string(f.payload.begin() + off, f.payload.begin() + off + width));
    }
    auto phi = EvalOprf(a, std::span(indices).first(padded.real_count), params);
    IntersectionResult result;
    for (size_t k = 0; k < padded.real_count; ++k) {
      if (psi.contains(phi[k])) result.elements.push_back(padded.elements[k]);
    }
    clock.End();
    result.metrics = Snapshot(cfg, ch, std::move(phases));
    Finish(ch, nullptr);
    return result;
  });
}

PartyMetrics RunMiddleAssistant(std::span<const Element> set, const PartyConfig& cfg,
                                const PartyChannels& ch) {
  cfg.Validate();
  if (cfg.role() != PartyRole::kMiddle) throw std::invalid_argument("not a middle party");
  RequireChannels(cfg, ch);
  return Guarded(cfg, ch, [&] {
    const auto& params = cfg.params;
    std::vector<PhaseTiming> phases;
    PhaseClock clock(cfg, phases);
    Prng prng = MakePrng(cfg);
    auto rot = MakeRotProvider(cfg.rot_mode, params.sec.lambda);

    clock.Begin("handshake");
    PrfKey key = KeyShare(cfg, ch, prng);

    clock.Begin("preprocess");
    PaddedSet padded = PadSet(set, params.set_size, params.sec.lambda, prng);
    OccupancyMatrix di = BuildOccupancy(DeriveIndices(padded.elements, key, params), params);
    ChoiceString s = SampleChoices(cfg, prng);

    clock.Begin("rot");
    auto [sent, received] = RunBothRots(*rot, cfg, ch, s, prng);

    clock.Begin("wheel");
    WheelState state = cfg.index == 2 ? ReceiveFirstHop(received, *ch.prev, params)
                                      : MiddleHopReceive(received, *ch.prev, params);
    if (cfg.observer) cfg.observer(PartyTrace{cfg.index, {}, di.d, state.c, state.s});
    MiddleHopSend(state, di, sent, *ch.next);
    clock.End();
    PartyMetrics metrics = Snapshot(cfg, ch, std::move(phases));
    Finish(ch, ch.next);
    return metrics;
  });
}

PartyMetrics RunTerminalAssistant(std::span<const Element> set, const PartyConfig& cfg,
                                  const PartyChannels& ch) {
  cfg.Validate();
  if (cfg.role() != PartyRole::kTerminal) throw std::invalid_argument("not the terminal party");
  RequireChannels(cfg, ch);
  return Guarded(cfg, ch, [&] {
    const auto& params = cfg.params;
    std::vector<PhaseTiming> phases;
    PhaseClock clock(cfg, phases);
    Prng prng = MakePrng(cfg);
    auto rot = MakeRotProvider(cfg.rot_mode, params.sec.lambda);

    clock.Begin("handshake");
    PrfKey key = KeyShare(cfg, ch, prng);

    clock.Begin("preprocess");
    PaddedSet padded = PadSet(set, params.set_size, params.sec.lambda, prng);
    auto indices = DeriveIndices(padded.elements, key, params);
    ChoiceString s = SampleChoices(cfg, prng);

    clock.Begin("rot");
    Prng recv_prng = prng.Fork();
    RotReceiverBatch received = rot->Receive(*ch.prev, s, params.m, recv_prng);

    clock.Begin("wheel");
    WheelState state = cfg.index == 2 ? ReceiveFirstHop(received, *ch.prev, params)
                                      : MiddleHopReceive(received, *ch.prev, params);
    if (cfg.observer) cfg.observer(PartyTrace{cfg.index, {}, {}, state.c, state.s});

    clock.Begin("output");
    auto psi = EvalOprf(state.c, indices, params);
    prng.Shuffle(psi);
    std::vector<uint8_t> payload;
    payload.reserve(psi.size() * params.oprf_bytes());
    for (const auto& v : psi) payload.insert(payload.end(), v.bytes().begin(), v.bytes().end());
    ch.leader_return->SendMessage(MsgType::kPsi, payload);
    clock.End();
    PartyMetrics metrics = Snapshot(cfg, ch, std::move(phases));
    Finish(ch, ch.leader_return);
    return metrics;
  });
}

IntersectionResult RunParty(std::span<const Element> set, const PartyConfig& cfg,
                            const PartyChannels& channels) {
  switch (cfg.role()) {
    case PartyRole::kLeader:
      return RunLeader(set, cfg, channels);
    case PartyRole::kMiddle:
      return {{}, RunMiddleAssistant(set, cfg, channels)};
    case PartyRole::kTerminal:
      return {{}, RunTerminalAssistant(set, cfg, channels)};
  }
  throw std::logic_error("unreachable");
}

}  // namespace mpsi

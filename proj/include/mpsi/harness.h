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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpsi/crypto.h"
#include "mpsi/params.h"
#include "mpsi/protocol.h"
#include "mpsi/rot.h"

namespace mpsi {

class Prng;

// Plaintext n-way intersection: elements of sets[0] present in every other
// set, deduplicated, in sets[0] order.
std::vector<Element> OracleIntersection(const std::vector<std::vector<Element>>& sets);

// n sets of `size` printable random elements; the first `overlap` entries of
// every set are the same planted elements.
std::vector<std::vector<Element>> GenerateSets(uint32_t n, uint64_t size, uint64_t overlap,
                                               Prng& prng);

struct TranscriptEntry {
  uint32_t from = 0;
  uint32_t to = 0;
  std::vector<uint8_t> frame;  // exact wire bytes, header included
};

// Line format: "<from>-><to> <TYPE> <hex>", grouped by directed edge
// (sorted by from, then to) and in send order within an edge.
std::string FormatTranscript(const std::vector<TranscriptEntry>& transcript);

struct SimOptions {
  RotMode rot_mode = RotMode::kDealer;
  uint64_t seed = 0;
  bool record_transcript = false;
  bool capture_traces = false;
  // Party `crash_party` throws on entering `crash_phase`.
  std::optional<uint32_t> crash_party;
  std::string crash_phase = "wheel";
  std::map<uint32_t, ChoiceString> forced_choices;
  // If false, party failures are collected in SimReport::errors instead of
  // rethrown.
  bool throw_on_abort = true;
};

struct SimReport {
  std::vector<Element> intersection;
  std::vector<PartyMetrics> parties;           // index 0 is P_1
  std::vector<PartyTrace> traces;              // when capture_traces
  std::vector<TranscriptEntry> transcript;     // when record_transcript
  std::vector<std::optional<std::string>> errors;  // per party
  ProtocolParams params;
  uint64_t seed = 0;
};

// Runs all n parties on threads over in-memory channels, with the real
// protocol code. Party i seeds its generator from (seed, i), exactly like the
// CLI does with --seed.
SimReport Simulate(const std::vector<std::vector<Element>>& sets,
                   const ProtocolParams& params, const SimOptions& options = {});

// Line-oriented key=value rendering of a report.
std::string FormatReport(const SimReport& report);

struct PartyBytes {
  uint32_t index = 0;
  uint64_t sent = 0;
  uint64_t received = 0;
  uint64_t wheel_sent = 0;  // DELTA / GAMMA_DELTA wire bytes
  uint64_t ot_sent = 0;     // OT_MSG wire bytes
};

// Exact per-party byte counts derived from the message layout: session
// headers, key forwarding, ROT handshakes, wheel matrices and Psi, each
// framed and chunked as the transport does.
struct CommunicationModel {
  std::vector<PartyBytes> parties;
  uint64_t total_sent = 0;
};
CommunicationModel PredictCommunication(const ProtocolParams& params, RotMode mode,
                                        size_t chunk_bytes = kDefaultChunkBytes);

struct CommunicationReport {
  std::vector<PartyBytes> measured;
  uint64_t measured_total = 0;
  CommunicationModel predicted;
};
CommunicationReport MeasureCommunication(const ProtocolParams& params, RotMode mode,
                                         uint64_t seed);

struct SoundnessReport {
  uint64_t trials = 0;
  uint64_t tested = 0;           // leader elements outside the intersection
  uint64_t false_positives = 0;
  double per_element_rate = 0;   // 1 - (1 - 2^-ell2)^N
  double expected = 0;
  double stddev = 0;
  bool within_3_sigma = true;
};
// Disjoint random sets of size N for every party; every reported element is
// a false positive.
SoundnessReport SoundnessExperiment(const ProtocolParams& params, uint64_t trials,
                                    uint64_t seed);

struct HammingReport {
  uint64_t trials = 0;
  uint64_t min_weight = 0;
  uint64_t violations = 0;  // draws with weight < d
  double mean_weight = 0;
};
// Builds D from N random elements, then measures the Hamming weight of
// gather(D, v) for `trials` fresh elements outside the set.
HammingReport HammingExperiment(const ProtocolParams& params, uint64_t trials,
                                uint64_t seed);

}  // namespace mpsi

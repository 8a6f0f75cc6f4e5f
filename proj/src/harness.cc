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

#include "mpsi/harness.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "mpsi/prng.h"
#include "mpsi/soprf.h"

namespace mpsi {
namespace {

Element RandomElement(Prng& prng) {
  return ToHex(prng.Bytes(16));
}

uint64_t FramedBytes(uint64_t payload, size_t chunk) {
  uint64_t frames = payload <= chunk ? 1 : (payload + chunk - 1) / chunk;
  return payload + frames * kFrameHeaderBytes;
}

}  // namespace

std::vector<Element> OracleIntersection(const std::vector<std::vector<Element>>& sets) {
  if (sets.empty()) return {};
  std::vector<std::unordered_set<Element>> others;
  for (size_t i = 1; i < sets.size(); ++i) {
    others.emplace_back(sets[i].begin(), sets[i].end());
  }
  std::vector<Element> out;
  std::unordered_set<Element> emitted;
  for (const auto& x : sets[0]) {
    bool everywhere = std::all_of(others.begin(), others.end(),
                                  [&](const auto& s) { return s.contains(x); });
    if (everywhere && emitted.insert(x).second) out.push_back(x);
  }
  return out;
}

std::vector<std::vector<Element>> GenerateSets(uint32_t n, uint64_t size, uint64_t overlap,
                                               Prng& prng) {
  if (overlap > size) throw std::invalid_argument("overlap exceeds set size");
  std::vector<Element> common;
  for (uint64_t k = 0; k < overlap; ++k) common.push_back(RandomElement(prng));
  std::vector<std::vector<Element>> sets(n, common);
  for (auto& s : sets) {
    while (s.size() < size) s.push_back(RandomElement(prng));
  }
  return sets;
}

std::string FormatTranscript(const std::vector<TranscriptEntry>& transcript) {
  std::ostringstream out;
  for (const auto& e : transcript) {
    auto type = static_cast<MsgType>(e.frame.at(4) & ~kContinuationFlag);
    out << e.from << "->" << e.to << ' ' << MsgTypeName(type) << ' '
        << ToHex(e.frame) << '\n';
  }
  return out.str();
}

SimReport Simulate(const std::vector<std::vector<Element>>& sets,
                   const ProtocolParams& params, const SimOptions& options) {
  const uint32_t n = params.n;
  if (sets.size() != n) {
    throw std::invalid_argument("simulate: got " + std::to_string(sets.size()) +
                                " sets for n = " + std::to_string(n));
  }

  // Directed edges: i -> i+1 on the ring, n -> 1 for Psi.
  struct Edge {
    uint32_t from, to;
    std::unique_ptr<Channel> from_end, to_end;
    std::vector<std::vector<uint8_t>> sent_from, sent_to;
  };
  MemoryHub hub;
  const std::string session = "sim-" + std::to_string(options.seed);
  std::vector<Edge> edges;
  for (uint32_t i = 1; i <= n; ++i) {
    uint32_t to = i == n ? 1 : i + 1;
    Edge e{i, to, hub.Connect(session, i, to, MemoryHub::Side::kFrom),
           hub.Connect(session, i, to, MemoryHub::Side::kTo), {}, {}};
    edges.push_back(std::move(e));
  }
  for (auto& e : edges) {
    e.from_end->set_recv_timeout(std::chrono::seconds(120));
    e.to_end->set_recv_timeout(std::chrono::seconds(120));
    if (options.record_transcript) {
      e.from_end->set_send_tap(
          [&e](std::span<const uint8_t> f) { e.sent_from.emplace_back(f.begin(), f.end()); });
      e.to_end->set_send_tap(
          [&e](std::span<const uint8_t> f) { e.sent_to.emplace_back(f.begin(), f.end()); });
    }
  }

  SimReport report;
  report.params = params;
  report.seed = options.seed;
  report.parties.resize(n);
  report.errors.resize(n);
  report.traces.resize(n);

  std::mutex trace_mu;
  std::vector<std::thread> workers;
  for (uint32_t i = 1; i <= n; ++i) {
    workers.emplace_back([&, i] {
      PartyConfig cfg;
      cfg.index = i;
      cfg.params = params;
      cfg.rot_mode = options.rot_mode;
      cfg.seed = options.seed;
      if (auto it = options.forced_choices.find(i); it != options.forced_choices.end()) {
        cfg.forced_choices = it->second;
      }
      if (options.crash_party && *options.crash_party == i) {
        cfg.fail_at_phase = options.crash_phase;
      }
      if (options.capture_traces) {
        cfg.observer = [&](const PartyTrace& t) {
          std::lock_guard lock(trace_mu);
          report.traces[t.index - 1] = t;
        };
      }
      PartyChannels ch;
      // Edge i-1 is i -> i+1 (or n -> 1 for i = n).
      if (i < n) ch.next = edges[i - 1].from_end.get();
      if (i > 1) ch.prev = edges[i - 2].to_end.get();
      if (i == 1) ch.leader_return = edges[n - 1].to_end.get();
      if (i == n) ch.leader_return = edges[n - 1].from_end.get();
      try {
        IntersectionResult r = RunParty(sets[i - 1], cfg, ch);
        if (i == 1) report.intersection = std::move(r.elements);
        report.parties[i - 1] = std::move(r.metrics);
      } catch (const std::exception& e) {
        report.errors[i - 1] = e.what();
      }
    });
  }
  for (auto& t : workers) t.join();

  if (options.record_transcript) {
    std::vector<TranscriptEntry> entries;
    for (const auto& e : edges) {
      for (const auto& f : e.sent_from) entries.push_back({e.from, e.to, f});
      for (const auto& f : e.sent_to) entries.push_back({e.to, e.from, f});
    }
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      return std::tie(a.from, a.to) < std::tie(b.from, b.to);
    });
    report.transcript = std::move(entries);
  }

  if (options.throw_on_abort) {
    for (uint32_t i = 0; i < n; ++i) {
      if (report.errors[i]) {
        throw std::runtime_error("party " + std::to_string(i + 1) +
                                 " failed: " + *report.errors[i]);
      }
    }
  }
  return report;
}

std::string FormatReport(const SimReport& report) {
  std::ostringstream out;
  out << "seed=" << report.seed << '\n';
  out << "parties=" << report.params.n << '\n';
  out << "set_size=" << report.params.set_size << '\n';
  out << "w=" << report.params.w << '\n';
  out << "intersection_size=" << report.intersection.size() << '\n';
  uint64_t total = 0;
  for (const auto& p : report.parties) {
    ChannelMetrics t = p.Total();
    total += t.bytes_sent;
    out << "party." << p.index << ".bytes_sent=" << t.bytes_sent << '\n';
    out << "party." << p.index << ".bytes_received=" << t.bytes_received << '\n';
    out << "party." << p.index << ".wheel_bytes_sent=" << p.WheelBytesSent() << '\n';
    for (const auto& ph : p.phases) {
      out << "party." << p.index << ".phase." << ph.name << "_ms=" << ph.millis << '\n';
    }
  }
  out << "total_bytes_sent=" << total << '\n';
  for (size_t i = 0; i < report.errors.size(); ++i) {
    if (report.errors[i]) out << "party." << i + 1 << ".error=" << *report.errors[i] << '\n';
  }
  return out.str();
}

CommunicationModel PredictCommunication(const ProtocolParams& params, RotMode mode,
                                        size_t chunk) {
  const uint32_t n = params.n;
  const uint64_t header =
      FramedBytes(4 + 2 + 4 + 4 + 1 + 2 + 4 + params.Serialize().size(), chunk);
  const uint64_t key = FramedBytes(params.key_bytes(), chunk);
  const uint64_t matrix = params.matrix_bytes();

  CommunicationModel model;
  model.parties.resize(n);
  for (uint32_t i = 0; i < n; ++i) model.parties[i].index = i + 1;
  auto send = [&](uint32_t from, uint32_t to, uint64_t bytes) {
    model.parties[from - 1].sent += bytes;
    model.parties[to - 1].received += bytes;
  };

  for (uint32_t i = 1; i < n; ++i) {
    send(i, i + 1, header);
    send(i + 1, i, header);
    send(i, i + 1, key);
    if (mode == RotMode::kDealer) {
      uint64_t seed = FramedBytes(params.key_bytes(), chunk);
      send(i, i + 1, seed);
      model.parties[i - 1].ot_sent += seed;
    } else {
      uint64_t a = FramedBytes(32, chunk);
      uint64_t b = FramedBytes(uint64_t{32} * params.w, chunk);
      send(i, i + 1, a);
      send(i + 1, i, b);
      model.parties[i - 1].ot_sent += a;
      model.parties[i].ot_sent += b;
    }
    uint64_t wheel = FramedBytes(i == 1 ? matrix : 2 * matrix, chunk);
    send(i, i + 1, wheel);
    model.parties[i - 1].wheel_sent += wheel;
  }
  send(n, 1, header);
  send(1, n, header);
  send(n, 1, FramedBytes(params.set_size * params.oprf_bytes(), chunk));

  for (const auto& p : model.parties) model.total_sent += p.sent;
  return model;
}

CommunicationReport MeasureCommunication(const ProtocolParams& params, RotMode mode,
                                         uint64_t seed) {
  Prng prng = Prng::FromSeed(seed, 0xC0FFEE);
  auto sets = GenerateSets(params.n, params.set_size, params.set_size / 4, prng);
  SimOptions opt;
  opt.rot_mode = mode;
  opt.seed = seed;
  SimReport sim = Simulate(sets, params, opt);

  CommunicationReport report;
  for (const auto& p : sim.parties) {
    ChannelMetrics t = p.Total();
    PartyBytes b;
    b.index = p.index;
    b.sent = t.bytes_sent;
    b.received = t.bytes_received;
    b.wheel_sent = p.WheelBytesSent();
    b.ot_sent = t.SentOf(MsgType::kOtMsg);
    report.measured_total += b.sent;
    report.measured.push_back(b);
  }
  report.predicted = PredictCommunication(params, mode);
  return report;
}

SoundnessReport SoundnessExperiment(const ProtocolParams& params, uint64_t trials,
                                    uint64_t seed) {
  SoundnessReport report;
  report.trials = trials;
  report.per_element_rate =
      -std::expm1(static_cast<double>(params.set_size) * std::log1p(-std::ldexp(1.0, -static_cast<int>(params.ell2))));
  if (trials == 0) return report;

  Prng prng = Prng::FromSeed(seed, 0x50D);
  for (uint64_t t = 0; t < trials; ++t) {
    // Fresh random elements per party: disjoint except with negligible
    // probability, which the oracle check below would catch.
    auto sets = GenerateSets(params.n, params.set_size, 0, prng);
    SimOptions opt;
    opt.seed = prng.NextU64();
    SimReport sim = Simulate(sets, params, opt);
    auto truth = OracleIntersection(sets);
    report.tested += params.set_size - truth.size();
    report.false_positives += sim.intersection.size() - truth.size();
  }
  const double q = report.per_element_rate;
  report.expected = report.tested * q;
  report.stddev = std::sqrt(report.tested * q * (1 - q));
  report.within_3_sigma =
      std::abs(static_cast<double>(report.false_positives) - report.expected) <=
      3 * report.stddev;
  return report;
}

HammingReport HammingExperiment(const ProtocolParams& params, uint64_t trials,
                                uint64_t seed) {
  HammingReport report;
  report.trials = trials;
  Prng prng = Prng::FromSeed(seed, 0x4A11);
  PrfKey key = PrfKey::Random(params.sec.lambda, prng);
  std::vector<Element> set;
  for (uint64_t k = 0; k < params.set_size; ++k) set.push_back(RandomElement(prng));
  OccupancyMatrix d = BuildOccupancy(set, key, params);
  std::unordered_set<Element> members(set.begin(), set.end());

  std::vector<Element> outside;
  while (outside.size() < trials) {
    Element x = RandomElement(prng);
    if (!members.contains(x)) outside.push_back(std::move(x));
  }
  auto indices = DeriveIndices(outside, key, params);
  report.min_weight = trials == 0 ? 0 : params.w;
  double sum = 0;
  for (const auto& v : indices) {
    uint64_t weight = Gather(d.d, v).Weight();
    report.min_weight = std::min(report.min_weight, weight);
    if (weight < params.sec.d) ++report.violations;
    sum += static_cast<double>(weight);
  }
  report.mean_weight = trials == 0 ? 0 : sum / static_cast<double>(trials);
  return report;
}

}  // namespace mpsi

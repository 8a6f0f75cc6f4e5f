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

// mpsi: run a networked party, derive parameters, generate inputs, simulate,
// benchmark.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mpsi/element_io.h"
#include "mpsi/harness.h"
#include "mpsi/params.h"
#include "mpsi/prng.h"
#include "mpsi/protocol.h"
#include "mpsi/rot.h"
#include "mpsi/transport.h"

namespace {

using namespace mpsi;

struct Common {
  uint32_t parties = 3;
  uint64_t set_size = 1024;
  uint32_t lambda = 128;
  uint32_t sigma = 40;
  std::optional<uint32_t> d;
  std::string rot = "dealer";
  std::optional<uint64_t> seed;

  SecurityConfig Security() const {
    SecurityConfig sec;
    sec.lambda = lambda;
    sec.sigma = sigma;
    sec.d = d.value_or(lambda);
    return sec;
  }
  ProtocolParams Params() const { return DeriveParams(set_size, parties, Security()); }
};

void AddCommon(CLI::App* app, Common& c) {
  app->add_option("--parties,-n", c.parties, "number of parties n")->check(CLI::Range(2u, 1u << 16));
  app->add_option("--set-size,-N", c.set_size, "set size bound N")->check(CLI::PositiveNumber);
  app->add_option("--lambda", c.lambda, "computational security parameter");
  app->add_option("--sigma", c.sigma, "statistical security parameter");
  app->add_option("--d", c.d, "Hamming weight threshold (defaults to lambda)");
  app->add_option("--rot", c.rot, "random OT provider")
      ->check(CLI::IsMember({"dealer", "seedot"}));
  app->add_option("--seed", c.seed, "fix all party randomness (testing only)");
}

void PrintMetrics(const PartyMetrics& m) {
  ChannelMetrics t = m.Total();
  std::cout << "bytes_sent=" << t.bytes_sent << '\n'
            << "bytes_received=" << t.bytes_received << '\n'
            << "frames_sent=" << t.frames_sent << '\n'
            << "wheel_bytes_sent=" << m.WheelBytesSent() << '\n'
            << "ot_bytes_sent=" << t.SentOf(MsgType::kOtMsg) << '\n'
            << "psi_bytes_sent=" << t.SentOf(MsgType::kPsi) << '\n';
  for (const auto& p : m.phases) std::cout << "phase." << p.name << "_ms=" << p.millis << '\n';
}

void PrintPrediction(const CommunicationModel& model) {
  for (const auto& p : model.parties) {
    std::cout << "predicted.party." << p.index << ".bytes_sent=" << p.sent << '\n';
  }
  std::cout << "predicted.total_bytes=" << model.total_sent << '\n'
            << "predicted.total_mib="
            << static_cast<double>(model.total_sent) / (1024.0 * 1024.0) << '\n';
}

int CmdRun(const Common& c, const std::string& role, uint32_t index,
           const std::string& listen, const std::string& next,
           const std::string& leader_return, const std::string& input,
           const std::string& output, uint32_t timeout_secs) {
  PartyConfig cfg;
  cfg.index = index;
  cfg.params = c.Params();
  cfg.rot_mode = ParseRotMode(c.rot);
  cfg.seed = c.seed;
  cfg.Validate();
  if (!role.empty() && role != RoleName(cfg.role())) {
    throw std::invalid_argument("--role " + role + " does not match index " +
                                std::to_string(index) + " (" + RoleName(cfg.role()) + ")");
  }
  if (cfg.role() == PartyRole::kLeader && output.empty()) {
    throw std::invalid_argument("the leader needs --output");
  }

  auto elements = ReadElementFile(input);
  spdlog::info("party {}/{} ({}) loaded {} elements", index, c.parties, RoleName(cfg.role()),
               elements.size());

  RingEndpoints eps;
  eps.listen = Endpoint::Parse(listen);
  if (!next.empty()) eps.next = Endpoint::Parse(next);
  if (!leader_return.empty()) eps.leader_return = Endpoint::Parse(leader_return);
  const auto window = std::chrono::seconds(timeout_secs);
  RingChannels ring = ConnectRing(index, c.parties, eps, window);
  for (Channel* ch : {ring.prev.get(), ring.next.get(), ring.leader_return.get()}) {
    if (ch) ch->set_recv_timeout(window);
  }
  spdlog::info("party {} connected", index);

  PartyChannels channels{ring.prev.get(), ring.next.get(), ring.leader_return.get()};
  IntersectionResult result = RunParty(elements, cfg, channels);
  if (cfg.role() == PartyRole::kLeader) {
    WriteElementFile(output, result.elements);
    std::cout << "intersection_size=" << result.elements.size() << '\n';
  }
  std::cout << "party=" << index << '\n' << "role=" << RoleName(cfg.role()) << '\n';
  PrintMetrics(result.metrics);
  return 0;
}

int CmdParams(const Common& c) {
  ProtocolParams p = c.Params();
  std::cout << p.Serialize();
  std::cout << "matrix_bytes=" << p.matrix_bytes() << '\n';
  PrintPrediction(PredictCommunication(p, ParseRotMode(c.rot)));
  return 0;
}

int CmdGen(const Common& c, uint64_t overlap, const std::string& dir) {
  Prng prng = c.seed ? Prng::FromSeed(*c.seed, 0x6E6) : Prng::FromOs();
  auto sets = GenerateSets(c.parties, c.set_size, overlap, prng);
  std::filesystem::create_directories(dir);
  for (uint32_t i = 0; i < c.parties; ++i) {
    auto path = std::filesystem::path(dir) / ("party_" + std::to_string(i + 1) + ".txt");
    // Shuffle so the planted elements are not simply the first lines.
    auto set = sets[i];
    prng.Shuffle(set);
    WriteElementFile(path.string(), set);
  }
  for (uint64_t k = 0; k < overlap; ++k) std::cout << EncodeElementLine(sets[0][k]) << '\n';
  return 0;
}

int CmdSimulate(const Common& c, uint64_t overlap, const std::vector<std::string>& inputs,
                bool transcript) {
  uint64_t seed = c.seed.value_or(Prng::FromOs().NextU64());
  std::vector<std::vector<Element>> sets;
  Common eff = c;
  if (!inputs.empty()) {
    for (const auto& path : inputs) sets.push_back(ReadElementFile(path));
    eff.parties = static_cast<uint32_t>(sets.size());
  } else {
    Prng prng = Prng::FromSeed(seed, 0x6E6);
    sets = GenerateSets(c.parties, c.set_size, overlap, prng);
  }
  SimOptions opt;
  opt.rot_mode = ParseRotMode(c.rot);
  opt.seed = seed;
  opt.record_transcript = transcript;
  SimReport report = Simulate(sets, eff.Params(), opt);
  std::cout << FormatReport(report);
  bool match = report.intersection == OracleIntersection(sets);
  std::cout << "oracle_match=" << (match ? "true" : "false") << '\n';
  if (transcript) std::cout << FormatTranscript(report.transcript);
  return match ? 0 : 3;
}

int CmdBench(const Common& c, const std::vector<uint32_t>& log_sizes,
             const std::vector<uint32_t>& party_counts, bool closed_form_only) {
  std::cout << "N,n,w,party,predicted_sent,measured_sent,wheel_sent,ot_sent,total_ms\n";
  uint64_t seed = c.seed.value_or(1);
  for (uint32_t lg : log_sizes) {
    for (uint32_t n : party_counts) {
      ProtocolParams p = DeriveParams(uint64_t{1} << lg, n, c.Security());
      RotMode mode = ParseRotMode(c.rot);
      CommunicationModel model = PredictCommunication(p, mode);
      if (closed_form_only) {
        for (const auto& b : model.parties) {
          std::cout << p.set_size << ',' << n << ',' << p.w << ',' << b.index << ','
                    << b.sent << ",,,," << '\n';
        }
        std::cout << p.set_size << ',' << n << ',' << p.w << ",total," << model.total_sent
                  << ",,,,\n";
        continue;
      }
      Prng prng = Prng::FromSeed(seed, 0xBE);
      auto sets = GenerateSets(n, p.set_size, p.set_size / 4, prng);
      SimOptions opt;
      opt.rot_mode = mode;
      opt.seed = seed;
      SimReport sim = Simulate(sets, p, opt);
      uint64_t measured_total = 0;
      for (const auto& m : sim.parties) {
        double ms = 0;
        for (const auto& ph : m.phases) ms += ph.millis;
        ChannelMetrics t = m.Total();
        measured_total += t.bytes_sent;
        std::cout << p.set_size << ',' << n << ',' << p.w << ',' << m.index << ','
                  << model.parties[m.index - 1].sent << ',' << t.bytes_sent << ','
                  << m.WheelBytesSent() << ',' << t.SentOf(MsgType::kOtMsg) << ',' << ms
                  << '\n';
      }
      std::cout << p.set_size << ',' << n << ',' << p.w << ",total," << model.total_sent << ','
                << measured_total << ",,,\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  // Logs go to stderr so stdout stays machine-readable.
  spdlog::set_default_logger(spdlog::stderr_color_mt("mpsi"));
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("MPSI_LOG")) {
    spdlog::set_level(spdlog::level::from_str(lvl));
  }

  CLI::App app{"Ring multiparty private set intersection"};
  app.require_subcommand(1);

  Common common;
  std::string role, listen, next, leader_return, input, output;
  uint32_t index = 1;
  uint32_t timeout_secs = 60;
  auto* run = app.add_subcommand("run", "run one party over TCP");
  AddCommon(run, common);
  run->add_option("--role", role, "expected role, checked against --index")
      ->check(CLI::IsMember({"leader", "middle", "terminal"}));
  run->add_option("--index,-i", index, "ring position, 1 is the leader")->required();
  run->add_option("--listen", listen, "host:port to accept the previous party on")->required();
  run->add_option("--next", next, "host:port of the next party");
  run->add_option("--leader-return", leader_return, "host:port of the leader (terminal only)");
  run->add_option("--input", input, "element file, one per line")->required();
  run->add_option("--output", output, "intersection output file (leader)");
  run->add_option("--timeout-secs", timeout_secs, "connect window and receive timeout");

  auto* params = app.add_subcommand("params", "print derived parameters");
  AddCommon(params, common);

  uint64_t overlap = 0;
  std::string dir = ".";
  auto* gen = app.add_subcommand("gen", "write random input files with a planted overlap");
  AddCommon(gen, common);
  gen->add_option("--overlap", overlap, "planted intersection size");
  gen->add_option("--dir", dir, "output directory");

  std::vector<std::string> sim_inputs;
  bool transcript = false;
  auto* simulate = app.add_subcommand("simulate", "run all parties in one process");
  AddCommon(simulate, common);
  simulate->add_option("--overlap", overlap, "planted intersection size for random sets");
  simulate->add_option("--input", sim_inputs, "element files, one per party, in ring order");
  simulate->add_flag("--transcript", transcript, "print every frame");

  std::vector<uint32_t> log_sizes{8, 10, 12};
  std::vector<uint32_t> party_counts{3};
  bool closed_form_only = false;
  auto* bench = app.add_subcommand("bench", "communication sweep, CSV on stdout");
  AddCommon(bench, common);
  bench->add_option("--log-sizes", log_sizes, "log2 N values");
  bench->add_option("--party-counts", party_counts, "n values");
  bench->add_flag("--closed-form", closed_form_only, "skip simulation, print predictions only");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      return CmdRun(common, role, index, listen, next, leader_return, input, output,
                    timeout_secs);
    }
    if (*params) return CmdParams(common);
    if (*gen) return CmdGen(common, overlap, dir);
    if (*simulate) return CmdSimulate(common, overlap, sim_inputs, transcript);
    if (*bench) return CmdBench(common, log_sizes, party_counts, closed_form_only);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

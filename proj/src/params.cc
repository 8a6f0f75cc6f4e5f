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

#include "mpsi/params.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mpsi {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::map<std::string, uint64_t> ToFields(const ProtocolParams& p) {
  return {
      {"N", p.set_size},      {"d", p.sec.d},
      {"ell1", p.ell1},       {"ell2", p.ell2},
      {"lambda", p.sec.lambda}, {"m", p.m},
      {"n", p.n},             {"sigma", p.sec.sigma},
      {"w", p.w},
  };
}

double LogAddExp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double LogChoose(uint32_t n, uint32_t k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

void SecurityConfig::Validate() const {
  if (lambda < 80) throw std::invalid_argument("lambda must be >= 80");
  if (sigma < 30) throw std::invalid_argument("sigma must be >= 30");
  if (d < 1) throw std::invalid_argument("d must be >= 1");
}

std::string ProtocolParams::Serialize() const {
  std::string out;
  for (const auto& [name, value] : ToFields(*this)) {
    out += name;
    out += '=';
    out += std::to_string(value);
    out += '\n';
  }
  return out;
}

ProtocolParams ProtocolParams::Parse(std::string_view text) {
  std::map<std::string, uint64_t> fields;
  while (!text.empty()) {
    auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument("params line without '=': " + std::string(line));
    }
    uint64_t value = 0;
    auto vs = line.substr(eq + 1);
    auto [ptr, ec] = std::from_chars(vs.data(), vs.data() + vs.size(), value);
    if (ec != std::errc() || ptr != vs.data() + vs.size()) {
      throw std::invalid_argument("bad params value: " + std::string(line));
    }
    fields[std::string(line.substr(0, eq))] = value;
  }
  auto take = [&](const char* name) -> uint64_t {
    auto it = fields.find(name);
    if (it == fields.end()) {
      throw std::invalid_argument(std::string("params missing field ") + name);
    }
    return it->second;
  };
  ProtocolParams p;
  p.set_size = take("N");
  p.sec.d = static_cast<uint32_t>(take("d"));
  p.ell1 = static_cast<uint32_t>(take("ell1"));
  p.ell2 = static_cast<uint32_t>(take("ell2"));
  p.sec.lambda = static_cast<uint32_t>(take("lambda"));
  p.m = take("m");
  p.n = static_cast<uint32_t>(take("n"));
  p.sec.sigma = static_cast<uint32_t>(take("sigma"));
  p.w = static_cast<uint32_t>(take("w"));
  if (fields.size() != 9) throw std::invalid_argument("params has unknown fields");
  return p;
}

std::string DescribeMismatch(const ProtocolParams& ours,
                             const ProtocolParams& theirs) {
  auto a = ToFields(ours);
  auto b = ToFields(theirs);
  for (const auto& [name, value] : a) {
    if (b[name] != value) {
      return name + ": " + std::to_string(value) + " != " +
             std::to_string(b[name]);
    }
  }
  return {};
}

double OccupancyProbability(uint64_t m, uint64_t set_size) {
  if (m == 0) throw std::invalid_argument("m must be positive");
  if (set_size == 0) return 1.0;
  if (m == 1) return 0.0;
  return std::exp(static_cast<double>(set_size) *
                  std::log1p(-1.0 / static_cast<double>(m)));
}

double LogTailBound(uint32_t w, uint64_t set_size, uint64_t m,
                    const SecurityConfig& sec) {
  const double log_n = std::log(static_cast<double>(set_size));
  // Fewer than d columns cannot ever reach weight d.
  if (w < sec.d) return log_n;

  double log_p;
  double log_q;  // log(1 - p)
  if (m == 1 && set_size > 0) {
    log_p = kNegInf;
    log_q = 0.0;
  } else if (set_size == 0) {
    log_p = 0.0;
    log_q = kNegInf;
  } else {
    double log_p_raw = static_cast<double>(set_size) *
                       std::log1p(-1.0 / static_cast<double>(m));
    log_p = log_p_raw;
    log_q = std::log(-std::expm1(log_p_raw));
  }

  double acc = kNegInf;
  for (uint32_t k = 0; k < sec.d; ++k) {
    double term_p = k == 0 ? 0.0 : k * log_p;
    double term_q = (w - k) == 0 ? 0.0 : (w - k) * log_q;
    if (term_p == kNegInf || term_q == kNegInf) continue;
    acc = LogAddExp(acc, LogChoose(w, k) + term_p + term_q);
  }
  return log_n + acc;
}

bool CheckWBound(uint32_t w, uint64_t set_size, uint64_t m,
                 const SecurityConfig& sec) {
  return LogTailBound(w, set_size, m, sec) <=
         -static_cast<double>(sec.sigma) * std::log(2.0);
}

uint32_t MinimalColumns(uint64_t set_size, uint64_t m,
                        const SecurityConfig& sec) {
  uint32_t hi = std::max<uint32_t>(sec.d, 1);
  while (!CheckWBound(hi, set_size, m, sec)) {
    if (hi >= kMaxColumns) {
      throw std::runtime_error("no column count <= 2^20 satisfies the bound");
    }
    hi = std::min<uint64_t>(static_cast<uint64_t>(hi) * 2, kMaxColumns);
  }
  // Invariant: CheckWBound(hi) holds; lo fails or lies below d.
  uint32_t lo = sec.d > 0 ? sec.d - 1 : 0;
  if (hi / 2 > lo && !CheckWBound(hi / 2, set_size, m, sec)) lo = hi / 2;
  while (hi - lo > 1) {
    uint32_t mid = lo + (hi - lo) / 2;
    if (CheckWBound(mid, set_size, m, sec)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

ProtocolParams DeriveParams(uint64_t set_size, uint32_t n,
                            const SecurityConfig& sec) {
  if (set_size < 2) throw std::invalid_argument("set size must be >= 2");
  if (n < 2) throw std::invalid_argument("party count must be >= 2");
  sec.Validate();

  ProtocolParams p;
  p.n = n;
  p.set_size = set_size;
  p.m = set_size;
  p.sec = sec;
  p.ell1 = 2 * sec.lambda;
  double ell2 = sec.sigma + 2.0 * std::log2(static_cast<double>(set_size));
  p.ell2 = static_cast<uint32_t>(std::ceil(ell2 - 1e-9));
  p.w = MinimalColumns(set_size, p.m, sec);
  return p;
}

}  // namespace mpsi

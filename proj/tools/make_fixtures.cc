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

// Regenerates the frozen test fixtures:
//   make_fixtures <out_dir>
// writes crypto_vectors.txt and golden_transcript.txt. Both are checked in;
// rerun only on an intentional wire or primitive change.

#include <fstream>
#include <iostream>
#include <string>

#include "golden_session.h"
#include "mpsi/crypto.h"
#include "mpsi/prng.h"

namespace {

using namespace mpsi;

// Empty byte strings are written as "-" so every line splits on whitespace.
std::string Hex(std::span<const uint8_t> bytes) {
  return bytes.empty() ? "-" : ToHex(bytes);
}

std::string Join(const IndexVector& v) {
  std::string out;
  for (size_t j = 0; j < v.size(); ++j) {
    if (j) out += ',';
    out += std::to_string(v[j]);
  }
  return out;
}

void WriteCryptoVectors(std::ostream& out) {
  out << "# h1 <element hex, - if empty> <ell1> <digest hex>\n"
      << "# h2 <w> <bits hex> <ell2> <value hex>\n"
      << "# prf <key hex> <m> <w> <digest hex> <indices>\n"
      << "# prg <seed hex> <bits> <output hex>\n";
  Prng prng = Prng::FromSeed(1, 0xF1);
  for (std::string x : {"", "a", "abc", "hello world", "shared-0"}) {
    for (uint32_t ell1 : {256u, 254u}) {
      out << "h1 " << Hex(AsBytes(x)) << ' ' << ell1 << ' ' << ToHex(H1(AsBytes(x), ell1))
          << '\n';
    }
  }
  for (uint32_t w : {1u, 8u, 13u, 64u, 585u}) {
    for (uint32_t ell2 : {8u, 53u, 64u}) {
      BitString bits(w);
      for (uint32_t j = 0; j < w; ++j) bits.Set(j, prng.NextU64() & 1);
      out << "h2 " << w << ' ' << ToHex(bits.bytes()) << ' ' << ell2 << ' '
          << ToHex(AsBytes(DefaultSuite().H2(bits, ell2).bytes())) << '\n';
    }
  }
  for (uint64_t m : {1ull, 16ull, 1000ull, 4096ull, 1ull << 20}) {
    for (uint32_t w : {1u, 5u, 16u}) {
      PrfKey key = PrfKey::Random(128, prng);
      auto digest = H1(AsBytes("x" + std::to_string(m)), 256);
      auto v = DefaultSuite().NewIndexPrf(key, m, w)->Eval(digest);
      out << "prf " << ToHex(key.bytes()) << ' ' << m << ' ' << w << ' ' << ToHex(digest)
          << ' ' << Join(v) << '\n';
    }
  }
  for (uint64_t bits : {1ull, 7ull, 128ull, 1000ull}) {
    auto seed = prng.Bytes(16);
    out << "prg " << ToHex(seed) << ' ' << bits << ' ' << ToHex(PrgExpand(seed, bits)) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <out_dir>\n";
    return 2;
  }
  std::string dir = argv[1];
  {
    std::ofstream out(dir + "/crypto_vectors.txt");
    WriteCryptoVectors(out);
  }
  {
    std::ofstream out(dir + "/golden_transcript.txt");
    out << FormatTranscript(golden::Run().transcript);
  }
  return 0;
}

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

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace mpsi {

// AES-256-CTR keystream generator. Every bit of randomness a party consumes
// flows through one of these, so a fixed seed reproduces a whole session.
class Prng {
 public:
  using Seed = std::array<uint8_t, 32>;

  explicit Prng(const Seed& seed);
  ~Prng();
  Prng(Prng&&) noexcept;
  Prng& operator=(Prng&&) noexcept;

  // Deterministic stream for (seed, stream); parties use their ring index.
  static Prng FromSeed(uint64_t seed, uint64_t stream = 0);
  // Seeded from the operating system.
  static Prng FromOs();

  void Fill(std::span<uint8_t> out);
  std::vector<uint8_t> Bytes(size_t n);
  uint64_t NextU64();
  // Uniform in [0, bound) by rejection sampling; bound > 0.
  uint64_t Uniform(uint64_t bound);
  // Independent child generator. Consumes 32 bytes of this stream.
  Prng Fork();

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(Uniform(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  void Refill();

  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mpsi

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

#include "mpsi/prng.h"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <cstring>
#include <stdexcept>

namespace mpsi {

namespace {
constexpr size_t kBufferBytes = 4096;
}  // namespace

struct Prng::Impl {
  EVP_CIPHER_CTX* ctx = nullptr;
  std::array<uint8_t, kBufferBytes> buffer{};
  size_t pos = kBufferBytes;

  ~Impl() { EVP_CIPHER_CTX_free(ctx); }
};

Prng::Prng(const Seed& seed) : impl_(std::make_unique<Impl>()) {
  impl_->ctx = EVP_CIPHER_CTX_new();
  uint8_t iv[16] = {0};
  if (impl_->ctx == nullptr ||
      EVP_EncryptInit_ex(impl_->ctx, EVP_aes_256_ctr(), nullptr, seed.data(),
                         iv) != 1) {
    throw std::runtime_error("prng: cipher init failed");
  }
}

Prng::~Prng() = default;
Prng::Prng(Prng&&) noexcept = default;
Prng& Prng::operator=(Prng&&) noexcept = default;

Prng Prng::FromSeed(uint64_t seed, uint64_t stream) {
  uint8_t input[8 + 8 + 9];
  std::memcpy(input, "mpsi.prng", 9);
  for (int i = 0; i < 8; ++i) {
    input[9 + i] = static_cast<uint8_t>(seed >> (8 * i));
    input[17 + i] = static_cast<uint8_t>(stream >> (8 * i));
  }
  Seed key{};
  unsigned int len = 0;
  if (EVP_Digest(input, sizeof(input), key.data(), &len, EVP_sha256(),
                 nullptr) != 1) {
    throw std::runtime_error("prng: seed derivation failed");
  }
  return Prng(key);
}

Prng Prng::FromOs() {
  Seed key{};
  if (RAND_bytes(key.data(), static_cast<int>(key.size())) != 1) {
    throw std::runtime_error("prng: OS randomness unavailable");
  }
  return Prng(key);
}

void Prng::Refill() {
  static const uint8_t kZeros[kBufferBytes] = {0};
  int out_len = 0;
  if (EVP_EncryptUpdate(impl_->ctx, impl_->buffer.data(), &out_len, kZeros,
                        static_cast<int>(kBufferBytes)) != 1) {
    throw std::runtime_error("prng: keystream failure");
  }
  impl_->pos = 0;
}

void Prng::Fill(std::span<uint8_t> out) {
  size_t done = 0;
  while (done < out.size()) {
    if (impl_->pos == kBufferBytes) Refill();
    size_t take = std::min(out.size() - done, kBufferBytes - impl_->pos);
    std::memcpy(out.data() + done, impl_->buffer.data() + impl_->pos, take);
    impl_->pos += take;
    done += take;
  }
}

std::vector<uint8_t> Prng::Bytes(size_t n) {
  std::vector<uint8_t> out(n);
  Fill(out);
  return out;
}

uint64_t Prng::NextU64() {
  uint8_t b[8];
  Fill(b);
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

uint64_t Prng::Uniform(uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("prng: zero bound");
  // Values at or above the largest multiple of bound are rejected.
  const uint64_t zone = (UINT64_MAX / bound) * bound;
  for (;;) {
    uint64_t v = NextU64();
    if (v < zone) return v % bound;
  }
}

Prng Prng::Fork() {
  Seed child{};
  Fill(child);
  return Prng(child);
}

}  // namespace mpsi

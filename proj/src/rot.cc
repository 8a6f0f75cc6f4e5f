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

#include "mpsi/rot.h"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

#include "mpsi/prng.h"

namespace mpsi {
namespace {

constexpr size_t kPointBytes = crypto_core_ristretto255_BYTES;
constexpr size_t kScalarBytes = crypto_core_ristretto255_SCALARBYTES;

void EnsureSodium() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium initialization failed");
}

void AppendLe32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

Frame ExpectFrame(Channel& channel, MsgType type) {
  Frame f = channel.RecvMessage(type);
  if (f.type == MsgType::kAbort) {
    throw ProtocolError("peer aborted during OT: " +
                        std::string(f.payload.begin(), f.payload.end()));
  }
  return f;
}

class DealerRot final : public RotProvider {
 public:
  DealerRot(uint32_t lambda, const CryptoSuite& suite)
      : seed_bytes_((lambda + 7) / 8), suite_(suite) {}

  RotMode mode() const override { return RotMode::kDealer; }
  size_t element_bytes() const override { return 0; }

  RotSenderBatch Send(Channel& channel, uint32_t w, uint64_t m, Prng& prng) override {
    std::vector<uint8_t> seed = prng.Bytes(seed_bytes_);
    channel.SendMessage(MsgType::kOtMsg, seed);
    std::vector<std::vector<uint8_t>> c0(w), c1(w);
    for (uint32_t j = 0; j < w; ++j) {
      c0[j] = Column(seed, j, 0, m);
      c1[j] = Column(seed, j, 1, m);
    }
    return {BitMatrix::FromColumns(m, c0), BitMatrix::FromColumns(m, c1)};
  }

  RotReceiverBatch Receive(Channel& channel, const ChoiceString& choices,
                           uint64_t m, Prng&) override {
    Frame f = ExpectFrame(channel, MsgType::kOtMsg);
    if (f.payload.size() != seed_bytes_) {
      throw ProtocolError("dealer seed has wrong length");
    }
    std::vector<std::vector<uint8_t>> cols(choices.size());
    for (size_t j = 0; j < choices.size(); ++j) {
      cols[j] = Column(f.payload, static_cast<uint32_t>(j), choices[j], m);
    }
    return {BitMatrix::FromColumns(m, cols), choices};
  }

 private:
  std::vector<uint8_t> Column(const std::vector<uint8_t>& seed, uint32_t j,
                              bool bit, uint64_t m) const {
    std::vector<uint8_t> input = seed;
    AppendLe32(input, j);
    input.push_back(bit ? 1 : 0);
    return suite_.PrgExpand(input, m);
  }

  size_t seed_bytes_;
  const CryptoSuite& suite_;
};

// Random-OT form of the "simplest OT": the sender publishes A = aG; the
// receiver answers B_j = b_j G (choice 0) or A + b_j G (choice 1). The sender
// keys are H(j, A, B_j, aB_j) and H(j, A, B_j, a(B_j - A)); the receiver can
// compute exactly the one matching b_j A.
class SeedOtRot final : public RotProvider {
 public:
  SeedOtRot(uint32_t lambda, const CryptoSuite& suite)
      : seed_bytes_((lambda + 7) / 8), suite_(suite) {
    EnsureSodium();
  }

  RotMode mode() const override { return RotMode::kSeedOt; }
  size_t element_bytes() const override { return kPointBytes; }

  RotSenderBatch Send(Channel& channel, uint32_t w, uint64_t m, Prng& prng) override {
    uint8_t a[kScalarBytes];
    RandomScalar(prng, a);
    uint8_t big_a[kPointBytes];
    if (crypto_scalarmult_ristretto255_base(big_a, a) != 0) {
      throw std::runtime_error("degenerate OT scalar");
    }
    channel.SendMessage(MsgType::kOtMsg, std::span<const uint8_t>(big_a, kPointBytes));

    Frame f = ExpectFrame(channel, MsgType::kOtMsg);
    if (f.payload.size() != static_cast<size_t>(w) * kPointBytes) {
      throw ProtocolError("OT receiver message has wrong length");
    }
    std::vector<std::vector<uint8_t>> c0(w), c1(w);
    for (uint32_t j = 0; j < w; ++j) {
      const uint8_t* big_b = f.payload.data() + j * kPointBytes;
      if (crypto_core_ristretto255_is_valid_point(big_b) != 1) {
        throw ProtocolError("OT receiver sent an invalid group element");
      }
      uint8_t shared[kPointBytes];
      uint8_t b_minus_a[kPointBytes];
      Mul(shared, a, big_b);
      c0[j] = suite_.PrgExpand(DeriveSeed(j, big_a, big_b, shared), m);
      crypto_core_ristretto255_sub(b_minus_a, big_b, big_a);
      Mul(shared, a, b_minus_a);
      c1[j] = suite_.PrgExpand(DeriveSeed(j, big_a, big_b, shared), m);
    }
    return {BitMatrix::FromColumns(m, c0), BitMatrix::FromColumns(m, c1)};
  }

  RotReceiverBatch Receive(Channel& channel, const ChoiceString& choices,
                           uint64_t m, Prng& prng) override {
    Frame f = ExpectFrame(channel, MsgType::kOtMsg);
    if (f.payload.size() != kPointBytes ||
        crypto_core_ristretto255_is_valid_point(f.payload.data()) != 1) {
      throw ProtocolError("OT sender sent an invalid group element");
    }
    const uint8_t* big_a = f.payload.data();

    const size_t w = choices.size();
    std::vector<uint8_t> reply(w * kPointBytes);
    std::vector<std::vector<uint8_t>> cols(w);
    for (size_t j = 0; j < w; ++j) {
      uint8_t b[kScalarBytes];
      RandomScalar(prng, b);
      uint8_t* big_b = reply.data() + j * kPointBytes;
      if (crypto_scalarmult_ristretto255_base(big_b, b) != 0) {
        throw std::runtime_error("degenerate OT scalar");
      }
      if (choices[j]) crypto_core_ristretto255_add(big_b, big_a, big_b);
      uint8_t shared[kPointBytes];
      Mul(shared, b, big_a);
      cols[j] = suite_.PrgExpand(
          DeriveSeed(static_cast<uint32_t>(j), big_a, big_b, shared), m);
    }
    channel.SendMessage(MsgType::kOtMsg, reply);
    return {BitMatrix::FromColumns(m, cols), choices};
  }

 private:
  static void RandomScalar(Prng& prng, uint8_t* out) {
    uint8_t wide[crypto_core_ristretto255_NONREDUCEDSCALARBYTES];
    prng.Fill(wide);
    crypto_core_ristretto255_scalar_reduce(out, wide);
  }

  static void Mul(uint8_t* out, const uint8_t* scalar, const uint8_t* point) {
    if (crypto_scalarmult_ristretto255(out, scalar, point) != 0) {
      throw ProtocolError("OT produced the identity element");
    }
  }

  std::vector<uint8_t> DeriveSeed(uint32_t j, const uint8_t* big_a,
                                  const uint8_t* big_b, const uint8_t* shared) const {
    std::vector<uint8_t> input;
    input.reserve(4 + 3 * kPointBytes);
    AppendLe32(input, j);
    input.insert(input.end(), big_a, big_a + kPointBytes);
    input.insert(input.end(), big_b, big_b + kPointBytes);
    input.insert(input.end(), shared, shared + kPointBytes);
    uint8_t digest[crypto_generichash_BYTES_MAX];
    crypto_generichash(digest, sizeof(digest), input.data(), input.size(), nullptr, 0);
    return std::vector<uint8_t>(digest, digest + std::min(seed_bytes_, sizeof(digest)));
  }

  size_t seed_bytes_;
  const CryptoSuite& suite_;
};

}  // namespace

const char* RotModeName(RotMode mode) {
  return mode == RotMode::kDealer ? "dealer" : "seedot";
}

RotMode ParseRotMode(const std::string& text) {
  if (text == "dealer") return RotMode::kDealer;
  if (text == "seedot") return RotMode::kSeedOt;
  throw std::invalid_argument("unknown ROT mode '" + text + "' (dealer|seedot)");
}

std::unique_ptr<RotProvider> MakeRotProvider(RotMode mode, uint32_t lambda,
                                             const CryptoSuite& suite) {
  if (mode == RotMode::kDealer) return std::make_unique<DealerRot>(lambda, suite);
  return std::make_unique<SeedOtRot>(lambda, suite);
}

}  // namespace mpsi

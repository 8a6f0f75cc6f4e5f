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

#include "mpsi/crypto.h"

#include <openssl/evp.h>

#include <cstring>
#include <stdexcept>

#include "mpsi/prng.h"

namespace mpsi {
namespace {

constexpr uint8_t kTagH1 = 0x01;
constexpr uint8_t kTagH2 = 0x02;
constexpr uint8_t kTagPrf = 0x03;
constexpr uint8_t kTagPrg = 0x04;

void ClearPad(std::span<uint8_t> bytes, uint64_t bits) {
  if (bits % 8 != 0 && !bytes.empty()) {
    bytes.back() &= static_cast<uint8_t>((1u << (bits % 8)) - 1);
  }
}

const EVP_MD* Shake256() {
  static EVP_MD* md = EVP_MD_fetch(nullptr, "SHAKE256", nullptr);
  return md;
}

// SHAKE256(tag || parts...) squeezed to out.size() bytes.
void Shake(uint8_t tag, std::initializer_list<std::span<const uint8_t>> parts,
           std::span<uint8_t> out) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              EVP_MD_CTX_free);
  bool ok = ctx && EVP_DigestInit_ex(ctx.get(), Shake256(), nullptr) == 1 &&
            EVP_DigestUpdate(ctx.get(), &tag, 1) == 1;
  for (auto part : parts) {
    ok = ok && EVP_DigestUpdate(ctx.get(), part.data(), part.size()) == 1;
  }
  ok = ok && EVP_DigestFinalXOF(ctx.get(), out.data(), out.size()) == 1;
  if (!ok) throw std::runtime_error("SHAKE256 failed");
}

using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, decltype(&EVP_CIPHER_CTX_free)>;

CipherCtx NewEcb(const uint8_t* key) {
  CipherCtx ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
  if (!ctx ||
      EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_ecb(), nullptr, key, nullptr) != 1) {
    throw std::runtime_error("AES init failed");
  }
  EVP_CIPHER_CTX_set_padding(ctx.get(), 0);
  return ctx;
}

void EcbBlocks(EVP_CIPHER_CTX* ctx, uint8_t* buf, size_t len) {
  int out_len = 0;
  if (EVP_EncryptUpdate(ctx, buf, &out_len, buf, static_cast<int>(len)) != 1) {
    throw std::runtime_error("AES encrypt failed");
  }
}

// Two independent AES-256 keys from k: one MACs the digest down to a 128-bit
// tweak, the other runs counter mode over that tweak.
class AesIndexPrf final : public IndexPrf {
 public:
  AesIndexPrf(const PrfKey& key, uint64_t m, uint32_t w)
      : m_(m), w_(w), mac_(nullptr, EVP_CIPHER_CTX_free),
        ctr_(nullptr, EVP_CIPHER_CTX_free) {
    if (m == 0 || m > (uint64_t{1} << 32)) {
      throw std::invalid_argument("index PRF needs 0 < m <= 2^32");
    }
    uint8_t keys[64];
    Shake(kTagPrf, {key.bytes()}, keys);
    mac_ = NewEcb(keys);
    ctr_ = NewEcb(keys + 32);
    buffer_.resize(((w + 1) / 2) * 16);
  }

  IndexVector Eval(std::span<const uint8_t> digest) const override {
    uint8_t tweak[16] = {0};
    for (size_t off = 0; off < digest.size(); off += 16) {
      size_t take = std::min<size_t>(16, digest.size() - off);
      for (size_t i = 0; i < take; ++i) tweak[i] ^= digest[off + i];
      EcbBlocks(mac_.get(), tweak, 16);
    }
    for (size_t b = 0; b * 16 < buffer_.size(); ++b) {
      uint8_t* blk = buffer_.data() + b * 16;
      std::memcpy(blk, tweak, 16);
      for (int i = 0; i < 8; ++i) blk[i] ^= static_cast<uint8_t>(b >> (8 * i));
    }
    if (!buffer_.empty()) EcbBlocks(ctr_.get(), buffer_.data(), buffer_.size());

    std::vector<uint32_t> idx(w_);
    for (uint32_t j = 0; j < w_; ++j) {
      uint64_t v = 0;
      for (int i = 7; i >= 0; --i) v = (v << 8) | buffer_[j * 8 + i];
      idx[j] = static_cast<uint32_t>(v % m_);
    }
    return IndexVector(std::move(idx), m_);
  }

 private:
  uint64_t m_;
  uint32_t w_;
  CipherCtx mac_;
  CipherCtx ctr_;
  mutable std::vector<uint8_t> buffer_;
};

class DefaultCryptoSuite final : public CryptoSuite {
 public:
  std::vector<uint8_t> H1(std::span<const uint8_t> element,
                          uint32_t ell1) const override {
    std::vector<uint8_t> out((ell1 + 7) / 8);
    Shake(kTagH1, {element}, out);
    ClearPad(out, ell1);
    return out;
  }

  OprfValue H2(const BitString& bits, uint32_t ell2) const override {
    uint8_t len[4];
    for (int i = 0; i < 4; ++i) len[i] = static_cast<uint8_t>(bits.size() >> (8 * i));
    std::string out((ell2 + 7) / 8, '\0');
    std::span<uint8_t> view(reinterpret_cast<uint8_t*>(out.data()), out.size());
    Shake(kTagH2, {std::span<const uint8_t>(len, 4), bits.bytes()}, view);
    ClearPad(view, ell2);
    return OprfValue(ell2, std::move(out));
  }

  std::unique_ptr<IndexPrf> NewIndexPrf(const PrfKey& key, uint64_t m,
                                        uint32_t w) const override {
    return std::make_unique<AesIndexPrf>(key, m, w);
  }

  std::vector<uint8_t> PrgExpand(std::span<const uint8_t> seed,
                                 uint64_t bits) const override {
    uint8_t key[32];
    Shake(kTagPrg, {seed}, key);
    std::vector<uint8_t> out((bits + 7) / 8, 0);
    if (out.empty()) return out;
    CipherCtx ctx(EVP_CIPHER_CTX_new(), EVP_CIPHER_CTX_free);
    uint8_t iv[16] = {0};
    int out_len = 0;
    if (!ctx ||
        EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_ctr(), nullptr, key, iv) != 1 ||
        EVP_EncryptUpdate(ctx.get(), out.data(), &out_len, out.data(),
                          static_cast<int>(out.size())) != 1) {
      throw std::runtime_error("PRG expansion failed");
    }
    ClearPad(out, bits);
    return out;
  }
};

}  // namespace

PrfKey::PrfKey(uint32_t bits, std::vector<uint8_t> bytes)
    : bits_(bits), bytes_(std::move(bytes)) {
  if (bytes_.size() != (bits + 7) / 8) {
    throw std::invalid_argument("PRF key must be ceil(lambda/8) bytes");
  }
  if (bits % 8 != 0 && (bytes_.back() >> (bits % 8)) != 0) {
    throw std::invalid_argument("PRF key pad bits set");
  }
}

PrfKey PrfKey::Random(uint32_t bits, Prng& prng) {
  std::vector<uint8_t> bytes = prng.Bytes((bits + 7) / 8);
  ClearPad(bytes, bits);
  return PrfKey(bits, std::move(bytes));
}

OprfValue::OprfValue(uint32_t bits, std::string bytes)
    : bits_(bits), bytes_(std::move(bytes)) {
  if (bytes_.size() != (bits + 7) / 8) {
    throw std::invalid_argument("OPRF value length mismatch");
  }
  if (bits % 8 != 0 &&
      (static_cast<uint8_t>(bytes_.back()) >> (bits % 8)) != 0) {
    throw std::invalid_argument("OPRF value pad bits set");
  }
}

const CryptoSuite& DefaultSuite() {
  static const DefaultCryptoSuite suite;
  return suite;
}

std::vector<uint8_t> H1(std::span<const uint8_t> element, uint32_t ell1) {
  return DefaultSuite().H1(element, ell1);
}

OprfValue H2(const BitString& bits, const ProtocolParams& params) {
  if (bits.size() != params.w) {
    throw std::invalid_argument("H2 input must be exactly w bits");
  }
  return DefaultSuite().H2(bits, params.ell2);
}

IndexVector PrfIndices(const PrfKey& key, std::span<const uint8_t> digest,
                       const ProtocolParams& params) {
  return DefaultSuite().NewIndexPrf(key, params.m, params.w)->Eval(digest);
}

std::vector<uint8_t> PrgExpand(std::span<const uint8_t> seed, uint64_t bits) {
  return DefaultSuite().PrgExpand(seed, bits);
}

std::string ToHex(std::span<const uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (uint8_t b : bytes) {
    out += kDigits[b >> 4];
    out += kDigits[b & 15];
  }
  return out;
}

std::vector<uint8_t> FromHex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("invalid hex digit");
  };
  std::vector<uint8_t> out(hex.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return out;
}

}  // namespace mpsi

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

#include "mpsi/bit_matrix.h"

#include <bit>
#include <cstring>
#include <stdexcept>
#include <string>

#include "mpsi/prng.h"

namespace mpsi {
namespace {

uint8_t PadMask(size_t rows) {
  size_t used = rows & 7;
  return used == 0 ? 0xFF : static_cast<uint8_t>((1u << used) - 1);
}

void RequireSameShape(const BitMatrix& a, const BitMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(
        "matrix dimension mismatch: " + std::to_string(a.rows()) + "x" +
        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
        std::to_string(b.cols()));
  }
}

void RequireChoiceLength(const BitMatrix& a, const ChoiceString& s) {
  if (s.size() != a.cols()) {
    throw std::invalid_argument("choice string length " +
                                std::to_string(s.size()) + " != columns " +
                                std::to_string(a.cols()));
  }
}

void XorInto(uint8_t* dst, const uint8_t* src, size_t n) {
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    uint64_t x, y;
    std::memcpy(&x, dst + i, 8);
    std::memcpy(&y, src + i, 8);
    x ^= y;
    std::memcpy(dst + i, &x, 8);
  }
  for (; i < n; ++i) dst[i] ^= src[i];
}

}  // namespace

BitString::BitString(size_t bits) : bits_(bits), bytes_((bits + 7) / 8, 0) {}

BitString::BitString(size_t bits, std::vector<uint8_t> bytes)
    : bits_(bits), bytes_(std::move(bytes)) {
  if (bytes_.size() != (bits + 7) / 8) {
    throw std::invalid_argument("bit string byte length mismatch");
  }
  if (bits_ % 8 != 0 && (bytes_.back() & ~PadMask(bits_)) != 0) {
    throw std::invalid_argument("bit string pad bits set");
  }
}

void BitString::Set(size_t i, bool bit) {
  uint8_t mask = static_cast<uint8_t>(1u << (i & 7));
  if (bit) {
    bytes_[i >> 3] |= mask;
  } else {
    bytes_[i >> 3] &= static_cast<uint8_t>(~mask);
  }
}

size_t BitString::Weight() const {
  size_t total = 0;
  for (uint8_t b : bytes_) total += std::popcount(b);
  return total;
}

BitString& BitString::operator^=(const BitString& other) {
  if (bits_ != other.bits_) throw std::invalid_argument("bit string length mismatch");
  XorInto(bytes_.data(), other.bytes_.data(), bytes_.size());
  return *this;
}

ChoiceString::ChoiceString(std::vector<uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) b = b ? 1 : 0;
}

ChoiceString ChoiceString::Constant(size_t w, bool bit) {
  return ChoiceString(std::vector<uint8_t>(w, bit ? 1 : 0));
}

ChoiceString ChoiceString::Random(size_t w, Prng& prng) {
  std::vector<uint8_t> packed((w + 7) / 8);
  prng.Fill(packed);
  std::vector<uint8_t> bits(w);
  for (size_t j = 0; j < w; ++j) bits[j] = (packed[j >> 3] >> (j & 7)) & 1u;
  return ChoiceString(std::move(bits));
}

IndexVector::IndexVector(std::vector<uint32_t> idx, uint64_t m)
    : idx_(std::move(idx)) {
  for (uint32_t v : idx_) {
    if (v >= m) {
      throw std::out_of_range("index " + std::to_string(v) + " >= m " +
                              std::to_string(m));
    }
  }
}

BitMatrix::BitMatrix(size_t rows, size_t cols)
    : rows_(rows), cols_(cols), col_bytes_((rows + 7) / 8),
      data_(col_bytes_ * cols, 0) {}

BitMatrix BitMatrix::Filled(size_t rows, size_t cols, bool bit) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("zero matrix dimension");
  BitMatrix out(rows, cols);
  if (bit) {
    std::memset(out.data_.data(), 0xFF, out.data_.size());
    out.ClearPadBits();
  }
  return out;
}

BitMatrix BitMatrix::Random(size_t rows, size_t cols, Prng& prng) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("zero matrix dimension");
  BitMatrix out(rows, cols);
  prng.Fill(out.data_);
  out.ClearPadBits();
  return out;
}

BitMatrix BitMatrix::FromBytes(size_t rows, size_t cols,
                               std::vector<uint8_t> bytes) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("zero matrix dimension");
  BitMatrix out(rows, cols);
  if (bytes.size() != out.data_.size()) {
    throw std::invalid_argument("matrix payload is " + std::to_string(bytes.size()) +
                                " bytes, expected " +
                                std::to_string(out.data_.size()));
  }
  out.data_ = std::move(bytes);
  if (!out.IsCanonical()) throw std::invalid_argument("matrix pad bits set");
  return out;
}

BitMatrix BitMatrix::FromColumns(size_t rows,
                                 const std::vector<std::vector<uint8_t>>& cols) {
  if (cols.empty()) return {};
  BitMatrix out(rows, cols.size());
  for (size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].size() != out.col_bytes_) {
      throw std::invalid_argument("column byte length mismatch");
    }
    std::memcpy(out.data_.data() + j * out.col_bytes_, cols[j].data(),
                out.col_bytes_);
  }
  out.ClearPadBits();
  return out;
}

void BitMatrix::Set(size_t row, size_t col, bool bit) {
  uint8_t& byte = data_[col * col_bytes_ + (row >> 3)];
  uint8_t mask = static_cast<uint8_t>(1u << (row & 7));
  byte = bit ? (byte | mask) : (byte & static_cast<uint8_t>(~mask));
}

size_t BitMatrix::ColumnWeight(size_t j) const {
  size_t total = 0;
  for (uint8_t b : column(j)) total += std::popcount(b);
  return total;
}

bool BitMatrix::IsCanonical() const {
  if (rows_ % 8 == 0) return true;
  uint8_t pad = static_cast<uint8_t>(~PadMask(rows_));
  for (size_t j = 0; j < cols_; ++j) {
    if (data_[(j + 1) * col_bytes_ - 1] & pad) return false;
  }
  return true;
}

void BitMatrix::ClearPadBits() {
  if (rows_ % 8 == 0) return;
  uint8_t keep = PadMask(rows_);
  for (size_t j = 0; j < cols_; ++j) data_[(j + 1) * col_bytes_ - 1] &= keep;
}

BitMatrix& BitMatrix::operator^=(const BitMatrix& other) {
  RequireSameShape(*this, other);
  XorInto(data_.data(), other.data_.data(), data_.size());
  return *this;
}

BitMatrix operator^(const BitMatrix& a, const BitMatrix& b) {
  BitMatrix out = a;
  out ^= b;
  return out;
}

BitMatrix Mux(const BitMatrix& a, const BitMatrix& b, const ChoiceString& s) {
  RequireSameShape(a, b);
  RequireChoiceLength(a, s);
  BitMatrix out = a;
  const size_t cb = a.col_bytes_;
  for (size_t j = 0; j < a.cols_; ++j) {
    if (s[j]) std::memcpy(out.data_.data() + j * cb, b.data_.data() + j * cb, cb);
  }
  return out;
}

BitMatrix MaskColumns(const BitMatrix& d, const ChoiceString& s) {
  RequireChoiceLength(d, s);
  BitMatrix out = d;
  const size_t cb = d.col_bytes_;
  for (size_t j = 0; j < d.cols_; ++j) {
    if (!s[j]) std::memset(out.data_.data() + j * cb, 0, cb);
  }
  return out;
}

BitString Gather(const BitMatrix& m, const IndexVector& v) {
  if (v.size() != m.cols()) {
    throw std::invalid_argument("index vector length " + std::to_string(v.size()) +
                                " != columns " + std::to_string(m.cols()));
  }
  BitString out(m.cols());
  for (size_t j = 0; j < m.cols(); ++j) {
    if (v[j] >= m.rows()) throw std::out_of_range("gather row out of range");
    if (m.Get(v[j], j)) out.Set(j, true);
  }
  return out;
}

}  // namespace mpsi

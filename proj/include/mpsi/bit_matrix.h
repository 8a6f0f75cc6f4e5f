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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mpsi {

class Prng;

// Packed bit string, LSB-first within each byte, unused high bits zero.
class BitString {
 public:
  BitString() = default;
  explicit BitString(size_t bits);
  // Validates length and zero pad bits.
  BitString(size_t bits, std::vector<uint8_t> bytes);

  size_t size() const { return bits_; }
  bool Get(size_t i) const { return (bytes_[i >> 3] >> (i & 7)) & 1u; }
  void Set(size_t i, bool bit);
  size_t Weight() const;

  std::span<const uint8_t> bytes() const { return bytes_; }

  BitString& operator^=(const BitString& other);
  bool operator==(const BitString&) const = default;

 private:
  size_t bits_ = 0;
  std::vector<uint8_t> bytes_;
};

// The receiver's OT choice bits s_i, one per matrix column.
class ChoiceString {
 public:
  ChoiceString() = default;
  explicit ChoiceString(std::vector<uint8_t> bits);

  static ChoiceString Constant(size_t w, bool bit);
  static ChoiceString Random(size_t w, Prng& prng);

  size_t size() const { return bits_.size(); }
  bool operator[](size_t j) const { return bits_[j] != 0; }

  bool operator==(const ChoiceString&) const = default;

 private:
  std::vector<uint8_t> bits_;
};

// One row index per column: v in [m]^w.
class IndexVector {
 public:
  IndexVector() = default;
  IndexVector(std::vector<uint32_t> idx, uint64_t m);

  size_t size() const { return idx_.size(); }
  uint32_t operator[](size_t j) const { return idx_[j]; }
  std::span<const uint32_t> values() const { return idx_; }

  bool operator==(const IndexVector&) const = default;

 private:
  std::vector<uint32_t> idx_;
};

// m x w binary matrix, column-major. Column j occupies bytes
// [j * column_bytes, (j + 1) * column_bytes); row r of a column is bit r % 8
// of byte r / 8. Pad bits past row m - 1 are always zero, so the raw byte
// buffer doubles as the wire encoding.
class BitMatrix {
 public:
  BitMatrix() = default;

  static BitMatrix Filled(size_t rows, size_t cols, bool bit);
  static BitMatrix Random(size_t rows, size_t cols, Prng& prng);
  // Adopts a wire buffer. Throws if the length or pad bits are wrong.
  static BitMatrix FromBytes(size_t rows, size_t cols,
                             std::vector<uint8_t> bytes);
  // Assembles a matrix from w independently produced columns.
  static BitMatrix FromColumns(size_t rows,
                               const std::vector<std::vector<uint8_t>>& cols);

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  size_t column_bytes() const { return col_bytes_; }
  bool empty() const { return cols_ == 0; }

  bool Get(size_t row, size_t col) const {
    return (data_[col * col_bytes_ + (row >> 3)] >> (row & 7)) & 1u;
  }
  void Set(size_t row, size_t col, bool bit);

  std::span<const uint8_t> column(size_t j) const {
    return {data_.data() + j * col_bytes_, col_bytes_};
  }
  std::span<const uint8_t> bytes() const { return data_; }

  size_t ColumnWeight(size_t j) const;
  // True iff every pad bit is zero.
  bool IsCanonical() const;

  BitMatrix& operator^=(const BitMatrix& other);
  bool operator==(const BitMatrix&) const = default;

 private:
  friend BitMatrix Mux(const BitMatrix&, const BitMatrix&, const ChoiceString&);
  friend BitMatrix MaskColumns(const BitMatrix&, const ChoiceString&);

  BitMatrix(size_t rows, size_t cols);
  void ClearPadBits();

  size_t rows_ = 0;
  size_t cols_ = 0;
  size_t col_bytes_ = 0;
  std::vector<uint8_t> data_;
};

BitMatrix operator^(const BitMatrix& a, const BitMatrix& b);

// Column j of the result is a_j when s[j] == 0, b_j otherwise.
BitMatrix Mux(const BitMatrix& a, const BitMatrix& b, const ChoiceString& s);

// Column j of the result is d_j when s[j] == 1, zero otherwise.
BitMatrix MaskColumns(const BitMatrix& d, const ChoiceString& s);

// Bit j of the result is m[v[j]][j].
BitString Gather(const BitMatrix& m, const IndexVector& v);

}  // namespace mpsi

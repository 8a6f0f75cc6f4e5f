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

#include <gtest/gtest.h>

#include <cmath>

#include "mpsi/bit_matrix.h"
#include "mpsi/prng.h"

namespace mpsi {
namespace {

// Naive per-bit references.
BitMatrix RefMux(const BitMatrix& a, const BitMatrix& b, const ChoiceString& s) {
  BitMatrix out = BitMatrix::Filled(a.rows(), a.cols(), false);
  for (size_t j = 0; j < a.cols(); ++j) {
    for (size_t r = 0; r < a.rows(); ++r) out.Set(r, j, s[j] ? b.Get(r, j) : a.Get(r, j));
  }
  return out;
}

BitMatrix RefXor(const BitMatrix& a, const BitMatrix& b) {
  BitMatrix out = BitMatrix::Filled(a.rows(), a.cols(), false);
  for (size_t j = 0; j < a.cols(); ++j) {
    for (size_t r = 0; r < a.rows(); ++r) out.Set(r, j, a.Get(r, j) != b.Get(r, j));
  }
  return out;
}

ChoiceString ChoiceFromMask(size_t w, uint32_t mask) {
  std::vector<uint8_t> bits(w);
  for (size_t j = 0; j < w; ++j) bits[j] = (mask >> j) & 1;
  return ChoiceString(bits);
}

BitMatrix MatrixFromMask(size_t m, size_t w, uint64_t mask) {
  BitMatrix out = BitMatrix::Filled(m, w, false);
  for (size_t j = 0; j < w; ++j) {
    for (size_t r = 0; r < m; ++r) out.Set(r, j, (mask >> ((j * m + r) % 64)) & 1);
  }
  return out;
}

TEST(BitMatrix, FilledOnesBytes) {
  BitMatrix a = BitMatrix::Filled(8, 2, true);
  ASSERT_EQ(a.bytes().size(), 2u);
  EXPECT_EQ(a.bytes()[0], 0xFF);
  EXPECT_EQ(a.bytes()[1], 0xFF);
  BitMatrix b = BitMatrix::Filled(3, 1, true);
  ASSERT_EQ(b.bytes().size(), 1u);
  EXPECT_EQ(b.bytes()[0], 0x07);
  EXPECT_TRUE(b.IsCanonical());
}

TEST(BitMatrix, ZeroDimensionRejected) {
  EXPECT_THROW(BitMatrix::Filled(0, 3, true), std::invalid_argument);
  EXPECT_THROW(BitMatrix::Filled(3, 0, true), std::invalid_argument);
}

TEST(BitMatrix, LayoutIsColumnMajorLsbFirst) {
  BitMatrix a = BitMatrix::Filled(10, 3, false);
  a.Set(9, 1, true);
  a.Set(0, 2, true);
  std::vector<uint8_t> want = {0, 0, 0, 0x02, 0x01, 0};
  EXPECT_EQ(std::vector<uint8_t>(a.bytes().begin(), a.bytes().end()), want);
}

TEST(BitMatrix, XorSelfIsZero) {
  BitMatrix a = BitMatrix::Filled(13, 5, true);
  EXPECT_EQ(a ^ a, BitMatrix::Filled(13, 5, false));
}

TEST(BitMatrix, XorGroupLaws) {
  Prng prng = Prng::FromSeed(1);
  for (int t = 0; t < 50; ++t) {
    size_t m = 1 + prng.Uniform(70), w = 1 + prng.Uniform(20);
    BitMatrix a = BitMatrix::Random(m, w, prng), b = BitMatrix::Random(m, w, prng),
              c = BitMatrix::Random(m, w, prng), z = BitMatrix::Filled(m, w, false);
    EXPECT_EQ((a ^ b) ^ c, a ^ (b ^ c));
    EXPECT_EQ(a ^ b, b ^ a);
    EXPECT_EQ(a ^ z, a);
    EXPECT_EQ((a ^ b) ^ b, a);
    EXPECT_EQ(a ^ b, RefXor(a, b));
    EXPECT_TRUE((a ^ b).IsCanonical());
    EXPECT_TRUE(a.IsCanonical());
  }
}

TEST(BitMatrix, XorDimensionMismatch) {
  EXPECT_THROW(BitMatrix::Filled(4, 2, true) ^ BitMatrix::Filled(5, 2, true),
               std::invalid_argument);
  EXPECT_THROW(BitMatrix::Filled(4, 2, true) ^ BitMatrix::Filled(4, 3, true),
               std::invalid_argument);
}

TEST(BitMatrix, XorWithOneZeroPerColumn) {
  Prng prng = Prng::FromSeed(2);
  const size_t m = 40, w = 9;
  BitMatrix a = BitMatrix::Random(m, w, prng);
  BitMatrix d = BitMatrix::Filled(m, w, true);
  std::vector<size_t> zero_row(w);
  for (size_t j = 0; j < w; ++j) {
    zero_row[j] = prng.Uniform(m);
    d.Set(zero_row[j], j, false);
  }
  BitMatrix x = a ^ d;
  for (size_t j = 0; j < w; ++j) {
    for (size_t r = 0; r < m; ++r) {
      EXPECT_EQ(x.Get(r, j) == a.Get(r, j), r == zero_row[j]);
    }
  }
}

TEST(BitMatrix, RandomIsDeterministicPerSeed) {
  Prng a = Prng::FromSeed(7), b = Prng::FromSeed(7), c = Prng::FromSeed(8);
  BitMatrix x = BitMatrix::Random(100, 10, a);
  EXPECT_EQ(x, BitMatrix::Random(100, 10, b));
  EXPECT_NE(x, BitMatrix::Random(100, 10, c));
}

TEST(BitMatrix, RandomColumnWeightsAreBinomial) {
  Prng prng = Prng::FromSeed(3);
  const int trials = 10000;
  double sum = 0;
  for (int t = 0; t < trials; ++t) sum += BitMatrix::Random(256, 1, prng).ColumnWeight(0);
  double mean = sum / trials;
  double sigma_of_mean = std::sqrt(256 * 0.25 / trials);
  EXPECT_NEAR(mean, 128.0, 3 * sigma_of_mean);
}

TEST(BitMatrix, RandomClearsPadBits) {
  Prng prng = Prng::FromSeed(4);
  for (size_t m = 1; m <= 17; ++m) EXPECT_TRUE(BitMatrix::Random(m, 3, prng).IsCanonical());
}

TEST(BitMatrix, MuxExtremes) {
  Prng prng = Prng::FromSeed(5);
  BitMatrix a = BitMatrix::Random(33, 7, prng), b = BitMatrix::Random(33, 7, prng);
  EXPECT_EQ(Mux(a, b, ChoiceString::Constant(7, false)), a);
  EXPECT_EQ(Mux(a, b, ChoiceString::Constant(7, true)), b);
}

TEST(BitMatrix, MuxMatchesReference) {
  Prng prng = Prng::FromSeed(6);
  for (int t = 0; t < 30; ++t) {
    size_t m = 1 + prng.Uniform(100), w = 1 + prng.Uniform(30);
    BitMatrix a = BitMatrix::Random(m, w, prng), b = BitMatrix::Random(m, w, prng);
    ChoiceString s = ChoiceString::Random(w, prng);
    EXPECT_EQ(Mux(a, b, s), RefMux(a, b, s));
  }
}

TEST(BitMatrix, MuxRejectsBadShapes) {
  BitMatrix a = BitMatrix::Filled(4, 3, true);
  EXPECT_THROW(Mux(a, BitMatrix::Filled(4, 2, true), ChoiceString::Constant(3, false)),
               std::invalid_argument);
  EXPECT_THROW(Mux(a, a, ChoiceString::Constant(2, false)), std::invalid_argument);
  EXPECT_THROW(MaskColumns(a, ChoiceString::Constant(4, true)), std::invalid_argument);
}

TEST(BitMatrix, MaskColumnsExtremes) {
  Prng prng = Prng::FromSeed(7);
  BitMatrix d = BitMatrix::Random(20, 6, prng);
  EXPECT_EQ(MaskColumns(d, ChoiceString::Constant(6, false)), BitMatrix::Filled(20, 6, false));
  EXPECT_EQ(MaskColumns(d, ChoiceString::Constant(6, true)), d);
}

// mux(A, A ^ D, s) == A ^ mask(D, s), every A, D, s for tiny shapes.
TEST(BitMatrix, MuxMaskIdentityExhaustiveSmall) {
  for (size_t m = 1; m <= 8; ++m) {
    for (size_t w = 1; w <= 8; ++w) {
      // All choice strings, a spread of matrices (full enumeration of A and D
      // is 2^(2mw); sample masks that cover every bit position in both states).
      for (uint32_t smask = 0; smask < (1u << w); ++smask) {
        ChoiceString s = ChoiceFromMask(w, smask);
        for (uint64_t am : {0x0ull, ~0x0ull, 0x5555555555555555ull, 0x0123456789abcdefull}) {
          for (uint64_t dm : {0x0ull, ~0x0ull, 0xaaaaaaaaaaaaaaaaull, 0xfedcba9876543210ull}) {
            BitMatrix a = MatrixFromMask(m, w, am), d = MatrixFromMask(m, w, dm);
            ASSERT_EQ(Mux(a, a ^ d, s), a ^ MaskColumns(d, s)) << m << "x" << w;
          }
        }
      }
    }
  }
}

TEST(BitMatrix, MuxMaskIdentityExhaustiveTiny) {
  // Truly exhaustive over A, D, s for m * w <= 4.
  for (size_t m = 1; m <= 2; ++m) {
    for (size_t w = 1; w <= 2; ++w) {
      size_t bits = m * w;
      for (uint64_t am = 0; am < (1u << bits); ++am) {
        for (uint64_t dm = 0; dm < (1u << bits); ++dm) {
          for (uint32_t sm = 0; sm < (1u << w); ++sm) {
            BitMatrix a = MatrixFromMask(m, w, am), d = MatrixFromMask(m, w, dm);
            ChoiceString s = ChoiceFromMask(w, sm);
            ASSERT_EQ(Mux(a, a ^ d, s), a ^ MaskColumns(d, s));
          }
        }
      }
    }
  }
}

TEST(BitMatrix, MuxMaskIdentityRandomLarge) {
  Prng prng = Prng::FromSeed(8);
  for (int t = 0; t < 10; ++t) {
    size_t m = 1000 + prng.Uniform(3000), w = 100 + prng.Uniform(500);
    BitMatrix a = BitMatrix::Random(m, w, prng), d = BitMatrix::Random(m, w, prng);
    ChoiceString s = ChoiceString::Random(w, prng);
    EXPECT_EQ(Mux(a, a ^ d, s), a ^ MaskColumns(d, s));
  }
}

TEST(BitMatrix, GatherOnes) {
  BitMatrix a = BitMatrix::Filled(50, 11, true);
  Prng prng = Prng::FromSeed(9);
  std::vector<uint32_t> idx(11);
  for (auto& i : idx) i = static_cast<uint32_t>(prng.Uniform(50));
  BitString g = Gather(a, IndexVector(idx, 50));
  EXPECT_EQ(g.size(), 11u);
  EXPECT_EQ(g.Weight(), 11u);
  ASSERT_EQ(g.bytes().size(), 2u);
  EXPECT_EQ(g.bytes()[1], 0x07);
}

TEST(BitMatrix, GatherSingleSetBit) {
  BitMatrix a = BitMatrix::Filled(16, 4, false);
  a.Set(5, 2, true);
  EXPECT_EQ(Gather(a, IndexVector({5, 5, 5, 5}, 16)).Weight(), 1u);
  EXPECT_TRUE(Gather(a, IndexVector({5, 5, 5, 5}, 16)).Get(2));
  EXPECT_EQ(Gather(a, IndexVector({5, 5, 4, 5}, 16)).Weight(), 0u);
}

TEST(BitMatrix, GatherIsLinear) {
  Prng prng = Prng::FromSeed(10);
  for (int t = 0; t < 50; ++t) {
    size_t m = 1 + prng.Uniform(300), w = 1 + prng.Uniform(80);
    BitMatrix a = BitMatrix::Random(m, w, prng), b = BitMatrix::Random(m, w, prng);
    std::vector<uint32_t> idx(w);
    for (auto& i : idx) i = static_cast<uint32_t>(prng.Uniform(m));
    IndexVector v(idx, m);
    BitString lhs = Gather(a ^ b, v);
    BitString rhs = Gather(a, v);
    rhs ^= Gather(b, v);
    EXPECT_EQ(lhs, rhs);
  }
}

TEST(BitMatrix, GatherRangeChecks) {
  BitMatrix a = BitMatrix::Filled(4, 3, true);
  EXPECT_THROW(Gather(a, IndexVector({1, 2}, 8)), std::invalid_argument);
  EXPECT_THROW(Gather(a, IndexVector({1, 2, 7}, 8)), std::out_of_range);
  EXPECT_NO_THROW(Gather(a, IndexVector({1, 2, 3}, 8)));
  EXPECT_THROW(IndexVector({1, 9}, 8), std::out_of_range);
}

TEST(BitMatrix, FromBytesValidates) {
  EXPECT_THROW(BitMatrix::FromBytes(3, 2, {0x07}), std::invalid_argument);
  EXPECT_THROW(BitMatrix::FromBytes(3, 2, {0x07, 0x08}), std::invalid_argument);
  BitMatrix a = BitMatrix::FromBytes(3, 2, {0x07, 0x05});
  EXPECT_TRUE(a.Get(2, 1));
  EXPECT_FALSE(a.Get(1, 1));
}

TEST(BitMatrix, FromColumns) {
  BitMatrix a = BitMatrix::FromColumns(9, {{0xff, 0x01}, {0x00, 0x00}});
  EXPECT_EQ(a.cols(), 2u);
  EXPECT_EQ(a.ColumnWeight(0), 9u);
  EXPECT_TRUE(BitMatrix::FromColumns(9, {}).empty());
  EXPECT_THROW(BitMatrix::FromColumns(9, {{0xff}}), std::invalid_argument);
}

TEST(BitString, Basics) {
  BitString s(13);
  EXPECT_EQ(s.bytes().size(), 2u);
  s.Set(12, true);
  s.Set(0, true);
  EXPECT_EQ(s.Weight(), 2u);
  EXPECT_THROW(BitString(9, {0xff, 0x02}), std::invalid_argument);
  EXPECT_THROW(BitString(9, {0xff}), std::invalid_argument);
  BitString t(12);
  EXPECT_THROW(s ^= t, std::invalid_argument);
}

TEST(ChoiceString, NormalizesAndSamples) {
  ChoiceString c({0, 1, 2});
  EXPECT_EQ(c, ChoiceString({0, 1, 1}));
  Prng prng = Prng::FromSeed(11);
  ChoiceString s = ChoiceString::Random(1000, prng);
  size_t ones = 0;
  for (size_t j = 0; j < s.size(); ++j) ones += s[j];
  EXPECT_GT(ones, 400u);
  EXPECT_LT(ones, 600u);
}

}  // namespace
}  // namespace mpsi

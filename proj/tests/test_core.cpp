// Copyright 2026 The CMC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <vector>

#include "cmc/bits.hpp"
#include "cmc/calibration_matrix.hpp"
#include "cmc/distribution.hpp"
#include "oracles.hpp"

namespace cmc {
namespace {

TEST(Bits, BitstringRoundTrip) {
  EXPECT_EQ(to_bitstring(0b0101, 4), "1010");
  EXPECT_EQ(from_bitstring("1010"), 0b0101u);
  for (BasisState s = 0; s < 64; ++s) EXPECT_EQ(from_bitstring(to_bitstring(s, 6)), s);
  EXPECT_THROW(from_bitstring("10x"), std::invalid_argument);
}

TEST(Bits, GatherScatterUseFirstQubitAsHighBit) {
  const std::vector<Qubit> support = {1, 4};
  EXPECT_EQ(gather_bits(BasisState{1} << 1, support), 2u);
  EXPECT_EQ(gather_bits(BasisState{1} << 4, support), 1u);
  for (std::size_t local = 0; local < 4; ++local) {
    EXPECT_EQ(gather_bits(scatter_bits(local, support), support), local);
  }
  EXPECT_EQ(support_mask(support), 0b10010u);
}

TEST(Bits, DenseIndexMatchesOracle) {
  for (std::size_t i = 0; i < 32; ++i) {
    const BasisState s = from_dense_index(i, 5);
    EXPECT_EQ(dense_index(s, 5), i);
    for (std::size_t q = 0; q < 5; ++q) {
      EXPECT_EQ(static_cast<int>((s >> q) & 1u), oracle::dense_bit(i, q, 5));
    }
  }
}

TEST(Bits, MixSeedSpreads) {
  EXPECT_NE(mix_seed(0), mix_seed(1));
  EXPECT_EQ(mix_seed(42), mix_seed(42));
}

TEST(Distribution, FromCountsNormalizes) {
  const Distribution d = Distribution::from_counts(2, {{0, 30}, {3, 70}});
  EXPECT_DOUBLE_EQ(d.probability(0), 0.3);
  EXPECT_DOUBLE_EQ(d.probability(3), 0.7);
  EXPECT_DOUBLE_EQ(d.probability(1), 0.0);
  EXPECT_THROW(Distribution::from_counts(2, {}), std::invalid_argument);
}

TEST(Distribution, RejectsOutOfRangeAndDuplicates) {
  EXPECT_THROW(Distribution(2, {{4, 1.0}}), std::invalid_argument);
  EXPECT_THROW(Distribution(2, {{1, 0.5}, {1, 0.5}}), std::invalid_argument);
}

TEST(Distribution, FinalizedClampsAndRenormalizes) {
  const Distribution d(2, {{0, 0.6}, {1, -0.2}, {3, 0.6}});
  const Distribution f = d.finalized();
  EXPECT_EQ(f.size(), 2u);
  EXPECT_DOUBLE_EQ(f.probability(0), 0.5);
  EXPECT_DOUBLE_EQ(f.probability(3), 0.5);
  EXPECT_THROW(Distribution(1, {{0, -1.0}}).finalized(), std::runtime_error);
}

TEST(Distribution, MarginalAndXor) {
  const Distribution d(3, {{0b000, 0.25}, {0b011, 0.25}, {0b101, 0.5}});
  const std::vector<Qubit> keep = {0};
  const Distribution m = d.marginal(keep);
  EXPECT_DOUBLE_EQ(m.probability(1), 0.75);
  EXPECT_DOUBLE_EQ(m.probability(0), 0.25);
  const Distribution x = d.xored(0b111);
  EXPECT_DOUBLE_EQ(x.probability(0b111), 0.25);
  EXPECT_DOUBLE_EQ(x.probability(0b010), 0.5);
}

TEST(CalibrationMatrix, ValidatesInvariants) {
  Matrix bad(2, 2);
  bad << 0.9, 0.1, 0.2, 0.9;
  EXPECT_THROW(CalibrationMatrix({0}, bad), std::invalid_argument);
  EXPECT_THROW(CalibrationMatrix({1, 0}, Matrix::Identity(4, 4)), std::invalid_argument);
  EXPECT_THROW(CalibrationMatrix({0}, Matrix::Identity(4, 4)), std::invalid_argument);
  Matrix negative(2, 2);
  negative << 1.1, 0.0, -0.1, 1.0;
  EXPECT_THROW(CalibrationMatrix({0}, negative), std::invalid_argument);
  EXPECT_NO_THROW(CalibrationMatrix::identity({0, 2}));
}

TEST(CalibrationMatrix, KronMatchesEigenProduct) {
  Rng rng(1);
  const Matrix a = oracle::random_stochastic(2, 0.8, rng);
  const Matrix b = oracle::random_stochastic(4, 0.8, rng);
  const Matrix k = kron(a, b);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      EXPECT_LT((k.block(4 * i, 4 * j, 4, 4) - a(i, j) * b).norm(), 1e-15);
    }
  }
}

TEST(PartialTrace, ProductStateGivesFactorExactly) {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const Matrix a = oracle::random_stochastic(2, 0.6, rng);
    const Matrix b = oracle::random_stochastic(2, 0.6, rng);
    const std::vector<Qubit> support = {2, 5};
    const std::vector<Qubit> first = {2}, second = {5};
    EXPECT_LT((normalized_partial_trace(kron(a, b), support, first) - a).cwiseAbs().maxCoeff(),
              1e-12);
    EXPECT_LT((normalized_partial_trace(kron(a, b), support, second) - b).cwiseAbs().maxCoeff(),
              1e-12);
  }
}

TEST(PartialTrace, MatchesOracleOnCorrelatedMatrix) {
  Rng rng(3);
  const Matrix m = oracle::random_stochastic(4, 0.7, rng);
  const std::vector<Qubit> support = {0, 1};
  for (Qubit keep : {Qubit{0}, Qubit{1}}) {
    const std::vector<Qubit> k = {keep};
    EXPECT_LT((normalized_partial_trace(m, support, k) -
               oracle::column_normalized(oracle::conditional_trace(m, support, keep)))
                  .norm(),
              1e-14);
  }
}

TEST(PartialTrace, IdentityReducesToIdentity) {
  const std::vector<Qubit> support = {0, 1, 2};
  const std::vector<Qubit> keep = {0, 2};
  EXPECT_LT((normalized_partial_trace(Matrix::Identity(8, 8), support, keep) -
             Matrix::Identity(4, 4))
                .norm(),
            1e-15);
}

TEST(PartialTrace, RejectsBadKeepSets) {
  const std::vector<Qubit> support = {0, 1};
  const std::vector<Qubit> all = {0, 1}, none = {}, missing = {3};
  EXPECT_THROW(normalized_partial_trace(Matrix::Identity(4, 4), support, all),
               std::invalid_argument);
  EXPECT_THROW(normalized_partial_trace(Matrix::Identity(4, 4), support, none),
               std::invalid_argument);
  EXPECT_THROW(normalized_partial_trace(Matrix::Identity(4, 4), support, missing),
               std::invalid_argument);
}

TEST(FractionalPower, RootRaisedBackRecoversMatrix) {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const Matrix c = oracle::random_stochastic(2, 0.7, rng);
    for (int v = 2; v <= 4; ++v) {
      const Matrix root = fractional_power(c, 1.0 / v);
      Matrix back = Matrix::Identity(2, 2);
      for (int i = 0; i < v; ++i) back = back * root;
      EXPECT_LT((back - c).norm(), 1e-8);
      EXPECT_LT((root - oracle::stochastic2_power(c, 1.0 / v)).norm(), 1e-10);
    }
  }
}

TEST(FractionalPower, DiagonalAndIdentity) {
  Matrix d(2, 2);
  d << 1.0, 0.0, 0.0, 0.81;
  const Matrix r = fractional_power(d, 0.5);
  EXPECT_NEAR(r(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(r(1, 1), 0.9, 1e-14);
  EXPECT_LT((fractional_power(Matrix::Identity(4, 4), 1.0 / 3) - Matrix::Identity(4, 4)).norm(),
            1e-14);
}

TEST(FractionalPower, FourByFourRoot) {
  Rng rng(5);
  const Matrix c = oracle::random_stochastic(4, 0.8, rng);
  const Matrix root = fractional_power(c, 1.0 / 3);
  EXPECT_LT((root * root * root - c).norm(), 1e-8);
}

TEST(FractionalPower, RejectsNegativeSpectrum) {
  Matrix flip(2, 2);
  flip << 0.0, 1.0, 1.0, 0.0;
  EXPECT_THROW(fractional_power(flip, 0.5), SingularFactorError);
}

TEST(InvertFactor, ExactInverseAndSingularReport) {
  Rng rng(6);
  const Matrix m = oracle::random_stochastic(4, 0.7, rng);
  const std::vector<Qubit> support = {3, 4};
  EXPECT_LT((m * invert_factor(m, support) - Matrix::Identity(4, 4)).norm(), 1e-10);
  Matrix rank_one(2, 2);
  rank_one << 0.5, 0.5, 0.5, 0.5;
  const std::vector<Qubit> one = {7};
  // The ridge retry rescues a rank-one factor but not a zero one.
  EXPECT_NO_THROW(invert_factor(rank_one, one));
  const Matrix singular = Matrix::Zero(2, 2);
  try {
    invert_factor(singular, one);
    FAIL() << "expected SingularFactorError";
  } catch (const SingularFactorError& e) {
    EXPECT_EQ(e.support(), one);
  }
}

}  // namespace
}  // namespace cmc

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

#include <cmath>

#include "cmc/noise.hpp"
#include "oracles.hpp"

namespace cmc {
namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

TEST(Channels, StateDependentLayout) {
  const Matrix m = state_dependent_channel(0, 0.02, 0.08).entries();
  Matrix expected(2, 2);
  expected << 0.98, 0.08, 0.02, 0.92;
  EXPECT_LT(max_abs(m - expected), 1e-15);
  EXPECT_EQ(state_dependent_channel(0, 0, 0).entries(), Matrix::Identity(2, 2));
  Matrix flip(2, 2);
  flip << 0, 1, 1, 0;
  EXPECT_EQ(state_dependent_channel(0, 1, 1).entries(), flip);
  EXPECT_THROW(state_dependent_channel(0, -0.1, 0), std::invalid_argument);
}

TEST(Channels, FlipAllIsComplement) {
  const Matrix m = correlated_channel({0, 1, 2, 3}, CorrelatedKind::flip_all, 1.0).entries();
  for (int c = 0; c < 16; ++c) EXPECT_EQ(m(15 - c, c), 1.0);
  EXPECT_EQ(m.sum(), 16.0);
}

TEST(Channels, ZeroProbabilityIsIdentity) {
  for (auto kind : {CorrelatedKind::pairwise_flip, CorrelatedKind::flip_all,
                    CorrelatedKind::joint_decay}) {
    EXPECT_EQ(correlated_channel({1, 2}, kind, 0.0).entries(), Matrix::Identity(4, 4));
  }
  EXPECT_EQ(correlated_channel({0, 1, 2}, CorrelatedKind::triplet_flip, 0.0).entries(),
            Matrix::Identity(8, 8));
  EXPECT_THROW(correlated_channel({0, 1, 2}, CorrelatedKind::pairwise_flip, 0.1),
               std::invalid_argument);
}

TEST(Channels, PairwiseFlipIsCorrelated) {
  const Matrix m = correlated_channel({0, 1}, CorrelatedKind::pairwise_flip, 0.1).entries();
  EXPECT_LT(max_abs(m.col(0) - (Eigen::Vector4d() << 0.9, 0, 0, 0.1).finished()), 1e-15);
  // Marginal error of each qubit from prepared 00 is 0.1; both flip with 0.1.
  const double single = m(2, 0) + m(3, 0);
  EXPECT_GT(m(3, 0), single * single);
}

TEST(Channels, JointDecayMovesAllOnesToZero) {
  const Matrix m = correlated_channel({0, 1}, CorrelatedKind::joint_decay, 0.3).entries();
  EXPECT_NEAR(m(0, 3), 0.3, 1e-15);
  EXPECT_NEAR(m(3, 3), 0.7, 1e-15);
  EXPECT_EQ(m(1, 1), 1.0);
}

TEST(Channels, ComposeProperties) {
  const auto id = CalibrationMatrix::identity({0});
  EXPECT_EQ(compose({id, id}, 2), Matrix::Identity(4, 4));
  const auto a = state_dependent_channel(0, 0.1, 0.2);
  const auto b = state_dependent_channel(1, 0.03, 0.05);
  EXPECT_LT(max_abs(compose({a, b}, 2) - compose({b, a}, 2)), 1e-15);
  EXPECT_LT(max_abs(compose({a, b}, 2) - kron(a.entries(), b.entries())), 1e-15);
  const auto pair = correlated_channel({0, 1}, CorrelatedKind::joint_decay, 0.4);
  EXPECT_GT(max_abs(compose({a, pair}, 2) - compose({pair, a}, 2)), 1e-3);
}

TEST(Channels, GhzInvariantUnderFlipAll) {
  const Distribution ghz = ideal_ghz(4);
  SparseCalibration sc;
  sc.factors.push_back(
      {{0, 1, 2, 3}, correlated_channel({0, 1, 2, 3}, CorrelatedKind::flip_all, 0.37).entries()});
  const Distribution out = apply(sc, ghz);
  EXPECT_NEAR(out.probability(0), 0.5, 1e-15);
  EXPECT_NEAR(out.probability(15), 0.5, 1e-15);
}

TEST(NoiseSpec, ChannelMatchesDenseOracle) {
  NoiseSpec spec = random_readout_noise(4, 0.02, 0.08, 3);
  spec.correlated.push_back(correlated_channel({0, 2}, CorrelatedKind::pairwise_flip, 0.05));
  spec.correlated.push_back(correlated_channel({1, 2, 3}, CorrelatedKind::triplet_flip, 0.02));
  EXPECT_LT(max_abs(dense_matrix(spec.channel_for({0, 1, 2, 3}), 4) - oracle::dense_channel(spec, 4)),
            1e-14);
}

TEST(NoiseSpec, CorrelatedChannelNeedsWholeSupportMeasured) {
  NoiseSpec spec = NoiseSpec::noiseless(3);
  spec.correlated.push_back(correlated_channel({0, 1}, CorrelatedKind::pairwise_flip, 0.5));
  EXPECT_TRUE(spec.channel_for({0, 2}).factors.empty());
  EXPECT_EQ(spec.channel_for({0, 1}).factors.size(), 1u);
}

TEST(NoiseSpec, RandomRatesInRangeAndSeeded) {
  const NoiseSpec a = random_readout_noise(50, 0.02, 0.08, 7);
  for (const auto& r : a.per_qubit) {
    EXPECT_GE(r.p01, 0.02);
    EXPECT_LE(r.p01, 0.08);
    EXPECT_GE(r.p10, 0.02);
    EXPECT_LE(r.p10, 0.08);
  }
  EXPECT_EQ(a.per_qubit, random_readout_noise(50, 0.02, 0.08, 7).per_qubit);
  EXPECT_THROW(random_readout_noise(2, 0.5, 0.1, 1), std::invalid_argument);
}

TEST(NoiseSpec, JsonRoundTripAndKinds) {
  NoiseSpec spec = random_readout_noise(3, 0.01, 0.05, 2);
  spec.correlated.push_back(correlated_channel({0, 1}, CorrelatedKind::joint_decay, 0.1));
  spec.gate_flip = 0.001;
  const NoiseSpec back = noise_spec_from_json(to_json(spec));
  EXPECT_EQ(back.per_qubit, spec.per_qubit);
  EXPECT_EQ(back.gate_flip, spec.gate_flip);
  ASSERT_EQ(back.correlated.size(), 1u);
  EXPECT_EQ(back.correlated[0].entries(), spec.correlated[0].entries());

  const auto j = nlohmann::json::parse(
      R"({"num_qubits": 3, "correlated": [{"kind": "triplet_flip", "support": [0, 1, 2], "p": 0.2}]})");
  const NoiseSpec k = noise_spec_from_json(j);
  EXPECT_NEAR(k.correlated[0].entries()(7, 0), 0.2, 1e-15);
  EXPECT_THROW(noise_spec_from_json(nlohmann::json::parse(
                   R"({"num_qubits": 2, "correlated": [{"kind": "flip_all", "support": [0, 5], "p": 0.2}]})")),
               std::invalid_argument);
}

TEST(Circuits, GhzScheduleIsBfs) {
  const auto line = generate_architecture(ArchitectureKind::linear, {4, 0, 0});
  const std::vector<std::pair<Qubit, Qubit>> expected = {{0, 1}, {1, 2}, {2, 3}};
  EXPECT_EQ(ghz_cnot_schedule(line), expected);
  const CouplingMap star(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  EXPECT_EQ(ghz_cnot_schedule(star).size(), 4u);
  EXPECT_EQ(ghz_cnot_schedule(star)[3], (std::pair<Qubit, Qubit>{0, 4}));
  EXPECT_EQ(ghz_cnot_schedule(tokyo_coupling_map()).size(), 19u);
  EXPECT_THROW(ghz_cnot_schedule(CouplingMap(3, {{0, 1}})), std::invalid_argument);
}

TEST(Circuits, IdealDistributions) {
  const auto line = generate_architecture(ArchitectureKind::linear, {5, 0, 0});
  EXPECT_EQ(ideal_distribution(ghz_circuit(line)), ideal_ghz(5));
  EXPECT_EQ(ideal_ghz(1), Distribution(1, {{0, 0.5}, {1, 0.5}}));
  Circuit c;
  c.num_qubits = 3;
  c.x(0).x(2).x(2);
  EXPECT_EQ(ideal_distribution(c), Distribution::point_mass(3, 1));
  c.measured = {1, 2};
  EXPECT_EQ(ideal_distribution(c), Distribution::point_mass(3, 0));
  Circuit bad;
  bad.num_qubits = 2;
  bad.x(0).h(0);
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Backend, NoiselessSamplingIsIdeal) {
  const auto line = generate_architecture(ArchitectureKind::linear, {2, 0, 0});
  Backend backend(NoiseSpec::noiseless(2), 1);
  const Counts counts = backend.sample(ghz_circuit(line), 4000);
  EXPECT_EQ(counts.size(), 2u);
  const double sigma = std::sqrt(4000 * 0.25);
  EXPECT_NEAR(static_cast<double>(counts.at(0)), 2000.0, 3 * sigma);
  EXPECT_NEAR(static_cast<double>(counts.at(3)), 2000.0, 3 * sigma);
  EXPECT_EQ(backend.circuits_run(), 1u);
  EXPECT_EQ(backend.shots_run(), 4000u);
}

TEST(Backend, SeededAndExactModesAgree) {
  NoiseSpec spec = random_readout_noise(3, 0.02, 0.08, 5);
  spec.correlated.push_back(correlated_channel({0, 1}, CorrelatedKind::pairwise_flip, 0.05));
  const auto line = generate_architecture(ArchitectureKind::linear, {3, 0, 0});
  const Circuit c = ghz_circuit(line);
  Backend a(spec, 9), b(spec, 9), exact(spec, 0, true);
  EXPECT_EQ(a.sample(c, 1000), b.sample(c, 1000));
  const Distribution want = exact.exact_distribution(c);
  const Distribution got = Distribution::from_counts(3, a.sample(c, 1000000));
  for (BasisState s = 0; s < 8; ++s) EXPECT_NEAR(got.probability(s), want.probability(s), 5e-3);
}

TEST(Backend, ExactDistributionMatchesDenseOracle) {
  NoiseSpec spec = random_readout_noise(3, 0.02, 0.08, 6);
  spec.correlated.push_back(correlated_channel({0, 1, 2}, CorrelatedKind::flip_all, 0.03));
  Circuit c;
  c.num_qubits = 3;
  c.x(1);
  Backend exact(spec, 0, true);
  const Eigen::VectorXd want =
      oracle::dense_channel(spec, 3) * to_dense(Distribution::point_mass(3, 0b010));
  EXPECT_LT((to_dense(exact.exact_distribution(c)) - want).lpNorm<1>(), 1e-14);
}

TEST(Backend, GateFlipPerturbsTargets) {
  NoiseSpec spec = NoiseSpec::noiseless(1);
  spec.gate_flip = 0.1;
  Circuit c;
  c.num_qubits = 1;
  c.x(0);
  Backend exact(spec, 0, true);
  EXPECT_NEAR(exact.exact_distribution(c).probability(0), 0.1, 1e-15);
}

TEST(SimulateCounts, SeededAndUnbiased) {
  SparseCalibration sc;
  sc.factors.push_back({{0}, state_dependent_channel(0, 0.0, 0.1).entries()});
  const Distribution ones = Distribution::point_mass(1, 1);
  const Counts a = simulate_counts(ones, sc, 100000, 4);
  EXPECT_EQ(a, simulate_counts(ones, sc, 100000, 4));
  EXPECT_NEAR(static_cast<double>(a.at(0)) / 100000.0, 0.1, 3 * std::sqrt(0.09 / 100000));
}

TEST(XChain, NoiselessHasNoErrors) {
  for (const auto& p : x_chain_experiment(10, {0, 0}, 0.0, 100, 1)) {
    EXPECT_EQ(p.error_rate, 0.0);
    EXPECT_EQ(p.ideal_bit, static_cast<int>(p.depth % 2));
  }
}

TEST(XChain, ClosedFormMatchesMarkovChainOracle) {
  const double g = 0.001, p01 = 0.02, p10 = 0.08;
  const auto points = x_chain_experiment(50, {p01, p10}, g, 10, 2);
  ASSERT_EQ(points.size(), 50u);
  double one = 0.0;  // probability the qubit holds 1 before readout
  for (const auto& p : points) {
    one = (1.0 - one) * (1.0 - g) + one * g;  // X then a possible flip
    const double error = p.ideal_bit ? one * p10 + (1.0 - one) * (1.0 - p01)
                                     : (1.0 - one) * p01 + one * (1.0 - p10);
    EXPECT_NEAR(p.expected, error, 1e-12) << "depth " << p.depth;
  }
  // Both bands rise with depth.
  EXPECT_GT(points[49].expected, points[1].expected);
  EXPECT_GT(points[48].expected, points[0].expected);
}

}  // namespace
}  // namespace cmc

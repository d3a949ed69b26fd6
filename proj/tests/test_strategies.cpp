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

#include "cmc/bench.hpp"
#include "cmc/strategies.hpp"

namespace cmc {
namespace {

const Method kAllMethods[] = {Method::bare, Method::full,   Method::linear, Method::cmc,
                              Method::cmc_err, Method::aim, Method::sim,    Method::jigsaw};

CouplingMap grid(std::size_t rows, std::size_t cols) {
  ArchitectureParams p;
  p.rows = rows;
  p.cols = cols;
  return generate_architecture(ArchitectureKind::grid, p);
}

StrategyConfig config_for(Method m) {
  StrategyConfig c;
  c.method = m;
  c.characterisation_shots = 500;
  return c;
}

TEST(Strategies, MethodNamesRoundTrip) {
  for (Method m : kAllMethods) EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_THROW(parse_method("tomography"), std::invalid_argument);
}

TEST(Strategies, LedgerStaysWithinBudget) {
  const CouplingMap map = grid(2, 3);
  const Circuit circuit = ghz_circuit(map);
  for (Method m : kAllMethods) {
    Backend backend(random_readout_noise(6, 0.02, 0.08, 3), 11);
    const ShotBudget budget{16000};
    const MethodResult r = run_strategy({circuit, map, backend, budget, 11}, config_for(m));
    EXPECT_LE(r.ledger.total(), budget.total) << to_string(m);
    EXPECT_GT(r.ledger.get("circuit"), 0u) << to_string(m);
    EXPECT_EQ(backend.shots_run(), r.ledger.total() + r.amortized_shots) << to_string(m);
    EXPECT_GE(backend.circuits_run(), r.circuits) << to_string(m);
    EXPECT_NEAR(r.mitigated.total(), 1.0, 1e-9) << to_string(m);
  }
}

TEST(Strategies, NoiselessExactIsFixedPoint) {
  const CouplingMap map = grid(2, 3);
  const Circuit circuit = ghz_circuit(map);
  const Distribution ideal = ideal_ghz(6);
  for (Method m : kAllMethods) {
    Backend backend(NoiseSpec::noiseless(6), 5, /*exact=*/true);
    const MethodResult r = run_strategy({circuit, map, backend, {16000}, 5}, config_for(m));
    EXPECT_LT(one_norm(r.mitigated, ideal), 1e-9) << to_string(m);
  }
}

TEST(Strategies, CircuitCountsByMethod) {
  const CouplingMap map = grid(2, 3);  // 6 qubits, 7 edges
  const Circuit circuit = ghz_circuit(map);
  auto count = [&](StrategyConfig cfg) {
    Backend backend(random_readout_noise(6, 0.02, 0.08, 1), 2);
    const std::size_t before = backend.circuits_run();
    const MethodResult r = run_strategy({circuit, map, backend, {64000}, 2}, cfg);
    EXPECT_EQ(backend.circuits_run() - before, r.circuits) << cfg.name();
    return r.circuits;
  };
  EXPECT_EQ(count(config_for(Method::bare)), 1u);
  EXPECT_EQ(count(config_for(Method::full)), 64u + 1u);
  EXPECT_EQ(count(config_for(Method::linear)), 3u);
  EXPECT_EQ(count(config_for(Method::sim)), 4u);
  // Masks on qubits 0-3 and 2-5, then the top two.
  EXPECT_EQ(count(config_for(Method::aim)), 4u);

  StrategyConfig jig = config_for(Method::jigsaw);
  jig.jigsaw_rounds = 3;
  EXPECT_EQ(count(jig), 3u + 3u * 3u);
  jig.jigsaw_calibrate_pairs = true;
  EXPECT_EQ(count(jig), 3u + 3u * (3u + 4u));

  const PatchPlan plan = calibration_plan(map, 1);
  std::size_t patches = 0;
  for (const auto& g : plan.groups) patches += g.size();
  EXPECT_EQ(patches, 7u);
  EXPECT_EQ(calibration_circuit_count(plan), 4 * plan.num_groups());
  EXPECT_EQ(count(config_for(Method::cmc)), 4 * plan.num_groups() + 1);
}

TEST(Strategies, CmcSharesCalibrationEvenly) {
  const CouplingMap map = grid(2, 3);
  const Circuit circuit = ghz_circuit(map);
  Backend backend(random_readout_noise(6, 0.02, 0.08, 1), 2);
  StrategyConfig cfg = config_for(Method::cmc);
  cfg.calibration_fraction = 0.25;
  const MethodResult r = run_strategy({circuit, map, backend, {10000}, 2}, cfg);
  const std::size_t cal_circuits = r.circuits - 1;
  EXPECT_EQ(r.ledger.get("calibration"), (2500 / cal_circuits) * cal_circuits);
  EXPECT_EQ(r.ledger.get("circuit"), 7500u);
}

TEST(Strategies, CalibrationPlanAddsIsolatedQubits) {
  const CouplingMap map(4, {{0, 1}});
  const PatchPlan plan = calibration_plan(map, 1);
  ASSERT_EQ(plan.num_groups(), 2u);
  EXPECT_EQ(plan.groups.back(), (std::vector<Patch>{{2}, {3}}));
}

TEST(Strategies, FullRefusesLargeRegisters) {
  ArchitectureParams p;
  p.num_qubits = 15;
  const CouplingMap map = generate_architecture(ArchitectureKind::linear, p);
  const Circuit circuit = ghz_circuit(map);
  Backend backend(NoiseSpec::noiseless(15), 1);
  EXPECT_THROW(run_full({circuit, map, backend, {1u << 20}, 1}, config_for(Method::full)),
               std::invalid_argument);
}

TEST(Strategies, TinyBudgetIsRejected) {
  const CouplingMap map = grid(2, 3);
  const Circuit circuit = ghz_circuit(map);
  Backend backend(NoiseSpec::noiseless(6), 1);
  EXPECT_THROW(run_full({circuit, map, backend, {100}, 1}, config_for(Method::full)),
               std::runtime_error);
  EXPECT_THROW(run_bare({circuit, map, backend, {0}, 1}, config_for(Method::bare)),
               std::invalid_argument);
}

TEST(Strategies, StoredErrMapSkipsPrePass) {
  const CouplingMap map = grid(2, 3);
  const Circuit circuit = ghz_circuit(map);
  StrategyConfig cfg = config_for(Method::cmc_err);
  Backend first(random_readout_noise(6, 0.02, 0.08, 1), 2);
  const MethodResult a = run_strategy({circuit, map, first, {16000}, 2}, cfg);
  EXPECT_GT(a.amortized_shots, 0u);
  cfg.stored_err_map = ErrMap{{Edge{0, 1}, Edge{2, 5}}, 6};
  Backend second(random_readout_noise(6, 0.02, 0.08, 1), 2);
  const MethodResult b = run_strategy({circuit, map, second, {16000}, 2}, cfg);
  EXPECT_EQ(b.amortized_shots, 0u);
  EXPECT_EQ(second.shots_run(), b.ledger.total());
}

TEST(JigsawUpdate, RescalesPairMarginal) {
  std::vector<Distribution::Entry> table = {{0b00, 0.5}, {0b11, 0.5}};
  ASSERT_TRUE(jigsaw_update(table, {0, 1}, {0.25, 0.0, 0.0, 0.75}, 0.0));
  const Distribution d(2, table);
  EXPECT_NEAR(d.probability(0b00), 0.25, 1e-15);
  EXPECT_NEAR(d.probability(0b11), 0.75, 1e-15);
}

TEST(JigsawUpdate, KeepsMassOutsideThePair) {
  // Qubit 2 is not in the pair; its conditional split is preserved.
  std::vector<Distribution::Entry> table = {{0b000, 0.2}, {0b100, 0.2}, {0b011, 0.6}};
  ASSERT_TRUE(jigsaw_update(table, {0, 1}, {0.5, 0.0, 0.0, 0.5}, 0.0));
  const Distribution d(3, table);
  EXPECT_NEAR(d.probability(0b000), 0.25, 1e-15);
  EXPECT_NEAR(d.probability(0b100), 0.25, 1e-15);
  EXPECT_NEAR(d.probability(0b011), 0.5, 1e-15);
}

TEST(JigsawUpdate, EpsilonFreezesSmallSubsets) {
  std::vector<Distribution::Entry> table = {{0b00, 1.0 - 1e-9}, {0b01, 1e-9}};
  ASSERT_TRUE(jigsaw_update(table, {0, 1}, {0.5, 0.0, 0.5, 0.0}, 1e-6));
  const Distribution d(2, table);
  // Pair index of state 0b01 is 2 (qubit 0 is the high bit).
  EXPECT_DOUBLE_EQ(d.probability(0b01), 1e-9);
  EXPECT_NEAR(d.probability(0b00), 1.0 - 1e-9, 1e-15);
}

TEST(JigsawUpdate, ZeroEpsilonLetsMassVanish) {
  std::vector<Distribution::Entry> table = {{0b00, 0.9}, {0b11, 0.1}};
  ASSERT_TRUE(jigsaw_update(table, {0, 1}, {1.0, 0.0, 0.0, 0.0}, 0.0));
  EXPECT_EQ(table.size(), 1u);
}

TEST(JigsawUpdate, NoEvidenceLeavesTable) {
  std::vector<Distribution::Entry> table = {{0b00, 0.5}, {0b11, 0.5}};
  EXPECT_FALSE(jigsaw_update(table, {0, 1}, {0.0, 1.0, 0.0, 0.0}, 0.0));
  EXPECT_EQ(table.size(), 2u);
  EXPECT_THROW(jigsaw_update(table, {0, 1}, {1.0, 0.0}, 0.0), std::invalid_argument);
}

TEST(StrategyConfig, JsonRoundTripAndUnknownKeys) {
  StrategyConfig c;
  c.method = Method::jigsaw;
  c.label = "jig";
  c.jigsaw_rounds = 5;
  c.jigsaw_epsilon = 1e-6;
  c.jigsaw_calibrate_pairs = true;
  c.separation = 2;
  const StrategyConfig back = strategy_config_from_json(to_json(c));
  EXPECT_EQ(back.method, Method::jigsaw);
  EXPECT_EQ(back.name(), "jig");
  EXPECT_EQ(back.jigsaw_rounds, 5u);
  EXPECT_DOUBLE_EQ(back.jigsaw_epsilon, 1e-6);
  EXPECT_TRUE(back.jigsaw_calibrate_pairs);
  EXPECT_EQ(back.separation, 2u);
  nlohmann::json j = to_json(c);
  j["shots_per_patch"] = 3;
  EXPECT_THROW(strategy_config_from_json(j), std::invalid_argument);
}

TEST(StrategyConfig, ValidateRejectsBadFractions) {
  StrategyConfig c;
  c.calibration_fraction = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace cmc

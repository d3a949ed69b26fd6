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
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cmc/bench.hpp"

namespace cmc {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cmc_test_bench";
  fs::create_directories(dir);
  return dir / name;
}

TEST(Metrics, SuccessProbabilityOnGhz) {
  const Distribution ideal = ideal_ghz(3);
  const Distribution observed(3, {{0b000, 0.4}, {0b111, 0.35}, {0b010, 0.25}});
  EXPECT_NEAR(success_probability(observed, ideal), 0.75, 1e-15);
  EXPECT_DOUBLE_EQ(success_probability(ideal, ideal), 1.0);
  EXPECT_THROW(success_probability(ideal_ghz(2), ideal), std::invalid_argument);
}

TEST(Metrics, OneNormExamples) {
  const Distribution a(2, {{0, 0.5}, {3, 0.5}});
  const Distribution b(2, {{0, 0.25}, {1, 0.75}});
  EXPECT_NEAR(one_norm(a, b), 0.25 + 0.75 + 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(one_norm(a, a), 0.0);
  EXPECT_DOUBLE_EQ(one_norm(Distribution::point_mass(2, 0), Distribution::point_mass(2, 3)), 2.0);
}

TEST(Metrics, OneNormIsAMetric) {
  Rng rng(9);
  auto random_dist = [&] {
    std::vector<Distribution::Entry> e;
    for (BasisState s = 0; s < 8; ++s) {
      if (uniform01(rng) < 0.6) e.emplace_back(s, uniform01(rng));
    }
    if (e.empty()) e.emplace_back(0, 1.0);
    return Distribution(3, e).finalized();
  };
  for (int t = 0; t < 200; ++t) {
    const Distribution a = random_dist(), b = random_dist(), c = random_dist();
    EXPECT_DOUBLE_EQ(one_norm(a, b), one_norm(b, a));
    EXPECT_LE(one_norm(a, c), one_norm(a, b) + one_norm(b, c) + 1e-12);
    EXPECT_LE(one_norm(a, b), 2.0 + 1e-12);
  }
}

ResultRecord sample_record() {
  ResultRecord r;
  r.method = "cmc";
  r.architecture = "grid_2x3";
  r.n = 6;
  r.trial = 3;
  r.seed = 42;
  r.success_probability = 0.8125;
  r.one_norm = 0.375;
  r.shots_calibration = 8000;
  r.shots_circuit = 8000;
  r.circuits = 9;
  r.diagnostics = {"patch groups: 2"};
  return r;
}

TEST(Output, CsvHeaderAndRow) {
  const std::string csv = format_csv({sample_record()});
  std::istringstream in(csv);
  std::string header, row, extra;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header,
            "method,n,trial,seed,success_probability,one_norm,shots_calibration,shots_circuit,"
            "wall_ms");
  EXPECT_EQ(row.rfind("cmc,6,3,42,", 0), 0u) << row;
  EXPECT_NE(row.find(",8000,8000,0.000"), std::string::npos) << row;
  EXPECT_FALSE(std::getline(in, extra));
}

TEST(Output, JsonRoundTripThroughFile) {
  ResultRecord failed = sample_record();
  failed.method = "full";
  failed.error = "budget too small";
  const std::vector<ResultRecord> records = {sample_record(), sample_record()};
  const fs::path path = scratch("results.json");
  emit_results(records, OutputFormat::json, path);
  EXPECT_EQ(load_results_json(path), records);
  EXPECT_EQ(result_record_from_json(to_json(failed)).error, "budget too small");
}

TEST(Output, EmptyInputIsAnError) {
  EXPECT_THROW(emit_results({}, OutputFormat::csv, scratch("empty.csv")), std::invalid_argument);
  EXPECT_EQ(parse_output_format("json"), OutputFormat::json);
  EXPECT_THROW(parse_output_format("xml"), std::invalid_argument);
}

ExperimentConfig small_experiment() {
  ExperimentConfig c;
  ArchitectureSpec a;
  a.kind = ArchitectureKind::grid;
  a.params.rows = 2;
  a.params.cols = 2;
  c.architectures = {a};
  for (Method m : {Method::bare, Method::cmc, Method::full}) {
    StrategyConfig s;
    s.method = m;
    c.methods.push_back(s);
  }
  c.shots = 4000;
  c.trials = 2;
  c.seed = 17;
  return c;
}

TEST(Experiment, RecordsEveryTrialAndMethod) {
  std::size_t streamed = 0;
  const auto records = run_experiment(small_experiment(), [&](const ResultRecord&) { ++streamed; });
  ASSERT_EQ(records.size(), 6u);
  EXPECT_EQ(streamed, 6u);
  for (const auto& r : records) {
    EXPECT_TRUE(r.error.empty()) << r.error;
    EXPECT_EQ(r.n, 4u);
    EXPECT_EQ(r.wall_ms, 0.0);
    EXPECT_LE(r.shots_calibration + r.shots_circuit, 4000u);
    EXPECT_EQ(r.seed, 17u ^ r.trial);
  }
}

TEST(Experiment, FailuresAreRecorded) {
  ExperimentConfig c = small_experiment();
  c.shots = 10;  // full needs 16 calibration circuits
  const auto records = run_experiment(c);
  bool saw = false;
  for (const auto& r : records) {
    if (r.method == "full") {
      EXPECT_FALSE(r.error.empty());
      EXPECT_TRUE(std::isnan(r.one_norm));
      saw = true;
    }
  }
  EXPECT_TRUE(saw);
}

TEST(Experiment, ConfigJsonRejectsUnknownKeys) {
  const ExperimentConfig c = small_experiment();
  const ExperimentConfig back = experiment_config_from_json(to_json(c));
  EXPECT_EQ(back.shots, 4000u);
  EXPECT_EQ(back.methods.size(), 3u);
  nlohmann::json j = to_json(c);
  j["repetitions"] = 3;
  EXPECT_THROW(experiment_config_from_json(j), std::invalid_argument);
  j.erase("repetitions");
  j["noise"]["low"] = 0.01;
  EXPECT_THROW(experiment_config_from_json(j), std::invalid_argument);
}

CalibrationStore measured_store() {
  ArchitectureParams p;
  p.num_qubits = 4;
  const CouplingMap map = generate_architecture(ArchitectureKind::linear, p);
  Backend backend(random_readout_noise(4, 0.02, 0.08, 5), 6);
  const PatchCalibration pc = calibrate_patches(backend, calibration_plan(map, 1), 1000);
  CalibrationStore s;
  s.device = "line_4";
  s.timestamp = "2026-01-01T00:00:00Z";
  s.num_qubits = 4;
  s.plan = pc.plan;
  s.records = pc.records;
  s.matrices = pc.matrices;
  return s;
}

TEST(CalibrationStore, RoundTripIsBitIdentical) {
  const CalibrationStore s = measured_store();
  const fs::path path = scratch("store.json");
  store_calibration(s, path);
  const CalibrationStore back = load_calibration(path);
  EXPECT_EQ(back.plan, s.plan);
  EXPECT_EQ(back.records, s.records);
  ASSERT_EQ(back.matrices.size(), s.matrices.size());
  for (std::size_t i = 0; i < s.matrices.size(); ++i) {
    EXPECT_EQ(back.matrices[i].support(), s.matrices[i].support());
    EXPECT_TRUE(back.matrices[i].entries() == s.matrices[i].entries());
  }
  const std::vector<Qubit> measured = {0, 1, 2, 3};
  const Distribution observed(4, {{0b0000, 0.45}, {0b1111, 0.45}, {0b0001, 0.1}});
  EXPECT_EQ(apply(back.mitigator(measured), observed), apply(s.mitigator(measured), observed));
}

TEST(CalibrationStore, RejectsOtherVersionsAndCorruption) {
  nlohmann::json j = to_json(measured_store());
  j["version"] = kCalibrationStoreVersion + 1;
  EXPECT_THROW(calibration_store_from_json(j), std::runtime_error);
  const fs::path path = scratch("corrupt.json");
  std::ofstream(path) << "{\"version\": 1, \"num_qubits\": ";
  EXPECT_THROW(load_calibration(path), std::runtime_error);
  EXPECT_THROW(load_calibration(scratch("missing.json")), std::runtime_error);
}

}  // namespace
}  // namespace cmc

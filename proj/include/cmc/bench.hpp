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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmc/calibration.hpp"
#include "cmc/noise.hpp"
#include "cmc/strategies.hpp"
#include "cmc/topology.hpp"

namespace cmc {

/// Mass of `observed` on the outcomes `verified` supports.
double success_probability(const Distribution& observed, const Distribution& verified);

/// Sum of |a(s) - b(s)| over the union of supports.
double one_norm(const Distribution& a, const Distribution& b);

/// A device graph named by generator, preset (tokyo, nairobi, quito) or file.
struct ArchitectureSpec {
  std::string label;
  std::optional<ArchitectureKind> kind;
  ArchitectureParams params;
  std::string preset;
  std::string file;

  CouplingMap build() const;
};

ArchitectureSpec architecture_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ArchitectureSpec& spec);

/// Readout noise for one trial: per-qubit rates drawn uniformly from
/// [low, high] (or taken from a file), plus fixed correlated channels.
struct NoiseConfig {
  double low = 0.02;
  double high = 0.08;
  std::vector<nlohmann::json> correlated;  // channel documents, see noise_spec_from_json
  double gate_flip = 0.0;
  std::string file;

  NoiseSpec build(std::size_t num_qubits, std::uint64_t seed) const;
};

NoiseConfig noise_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NoiseConfig& config);

struct ExperimentConfig {
  std::vector<ArchitectureSpec> architectures;
  NoiseConfig noise;
  std::vector<StrategyConfig> methods;
  std::uint64_t shots = 16000;
  std::size_t trials = 50;
  std::uint64_t seed = 1;
  bool exact = false;          // infinite-shot simulation
  bool record_timing = false;  // wall_ms is 0 unless set, keeping output reproducible

  void validate() const;
};

/// Parses a config document. Relative file paths resolve against `base_dir`.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct ResultRecord {
  std::string method;
  std::string architecture;
  std::size_t n = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double success_probability = 0.0;
  double one_norm = 0.0;
  std::uint64_t shots_calibration = 0;
  std::uint64_t shots_circuit = 0;
  std::uint64_t shots_amortized = 0;
  std::size_t circuits = 0;
  double wall_ms = 0.0;
  std::vector<std::string> diagnostics;
  std::string error;  // non-empty when the strategy failed

  friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

nlohmann::json to_json(const ResultRecord& r);
ResultRecord result_record_from_json(const nlohmann::json& j);

using RecordSink = std::function<void(const ResultRecord&)>;

/// Every (architecture, trial, method) on a GHZ circuit. Strategy failures
/// are recorded, not thrown. Trial seeds are seed XOR trial.
std::vector<ResultRecord> run_experiment(const ExperimentConfig& config,
                                         const RecordSink& sink = {});

enum class OutputFormat { csv, json };
OutputFormat parse_output_format(std::string_view name);

/// CSV columns: method, n, trial, seed, success_probability, one_norm,
/// shots_calibration, shots_circuit, wall_ms.
std::string format_csv(const std::vector<ResultRecord>& records);
std::string format_json(const std::vector<ResultRecord>& records);

/// Writes through a temporary file and a rename. Empty input is an error.
void emit_results(const std::vector<ResultRecord>& records, OutputFormat format,
                  const std::filesystem::path& path);

std::vector<ResultRecord> load_results_json(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Calibration persistence

inline constexpr int kCalibrationStoreVersion = 1;

struct CalibrationStore {
  std::string device;
  std::string timestamp;
  std::size_t num_qubits = 0;
  PatchPlan plan;
  std::optional<ErrMap> err_map;
  std::vector<CountsRecord> records;
  std::vector<CalibrationMatrix> matrices;

  /// Inverse calibration for the given measured qubits.
  SparseCalibration mitigator(const std::vector<Qubit>& measured) const;
};

nlohmann::json to_json(const CalibrationStore& store);
CalibrationStore calibration_store_from_json(const nlohmann::json& j);
void store_calibration(const CalibrationStore& store, const std::filesystem::path& path);
CalibrationStore load_calibration(const std::filesystem::path& path);

/// Reads a JSON document, with the file name in any error.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace cmc

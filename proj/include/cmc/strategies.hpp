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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cmc/calibration.hpp"
#include "cmc/distribution.hpp"
#include "cmc/noise.hpp"
#include "cmc/topology.hpp"

namespace cmc {

enum class Method { bare, full, linear, cmc, cmc_err, aim, sim, jigsaw };

Method parse_method(std::string_view name);
std::string to_string(Method method);

/// How AIM ranks its phase-one masks.
enum class AimScore {
  max_frequency,  // largest single-outcome frequency
  min_entropy,    // lowest Shannon entropy
};

struct StrategyConfig {
  Method method = Method::bare;
  std::string label;  // defaults to the method id

  /// Share of the budget spent on calibration circuits (full, linear, cmc,
  /// cmc_err) or on AIM's first phase.
  double calibration_fraction = 0.5;

  // cmc, cmc_err
  std::size_t separation = 1;
  double cull_threshold = kDefaultCullThreshold;

  // cmc_err
  std::size_t locality = 3;
  std::size_t max_edges = 0;  // 0: number of qubits
  /// Shots per weight-estimation circuit. This pre-pass is amortised over
  /// many runs and is reported separately from the budget.
  std::uint64_t characterisation_shots = 1000;
  std::optional<ErrMap> stored_err_map;

  // aim
  std::size_t aim_top_k = 2;
  AimScore aim_score = AimScore::max_frequency;

  // jigsaw
  std::size_t jigsaw_rounds = 2;
  double jigsaw_epsilon = 0.0;
  double jigsaw_global_fraction = 0.5;
  /// Mitigate each pair sub-table with a simultaneous 4x4 pair calibration.
  bool jigsaw_calibrate_pairs = false;

  // full
  bool force_full = false;

  std::string name() const { return label.empty() ? to_string(method) : label; }
  void validate() const;
};

nlohmann::json to_json(const StrategyConfig& config);
StrategyConfig strategy_config_from_json(const nlohmann::json& j);

/// Shots spent per phase ("calibration", "circuit").
struct ShotLedger {
  std::map<std::string, std::uint64_t> phases;

  void add(const std::string& phase, std::uint64_t shots) { phases[phase] += shots; }
  std::uint64_t get(const std::string& phase) const;
  std::uint64_t total() const;
};

struct ShotBudget {
  std::uint64_t total = 0;

  /// floor(total * fraction) for calibration, the rest for the circuit.
  std::uint64_t calibration(double fraction) const;
  std::uint64_t circuit(double fraction) const { return total - calibration(fraction); }
};

struct MethodResult {
  Distribution mitigated;
  ShotLedger ledger;
  std::size_t circuits = 0;
  std::uint64_t amortized_shots = 0;  // pre-pass shots outside the budget
  std::vector<std::string> diagnostics;
};

/// Everything a strategy may touch. The backend counts executed circuits.
struct StrategyContext {
  const Circuit& circuit;
  const CouplingMap& map;
  Backend& backend;
  ShotBudget budget;
  std::uint64_t seed = 0;
};

MethodResult run_bare(const StrategyContext& ctx, const StrategyConfig& cfg);
MethodResult run_full(const StrategyContext& ctx, const StrategyConfig& cfg);
MethodResult run_linear(const StrategyContext& ctx, const StrategyConfig& cfg);
MethodResult run_cmc(const StrategyContext& ctx, const StrategyConfig& cfg);
MethodResult run_cmc_err(const StrategyContext& ctx, const StrategyConfig& cfg);
MethodResult run_sim(const StrategyContext& ctx, const StrategyConfig& cfg);
MethodResult run_aim(const StrategyContext& ctx, const StrategyConfig& cfg);
MethodResult run_jigsaw(const StrategyContext& ctx, const StrategyConfig& cfg);

MethodResult run_strategy(const StrategyContext& ctx, const StrategyConfig& cfg);

// ---------------------------------------------------------------------------
// Building blocks shared with the CLI

/// Patch calibration measured on a backend.
struct PatchCalibration {
  PatchPlan plan;                        // groups actually run, singletons included
  std::vector<CalibrationMatrix> matrices;
  std::vector<CountsRecord> records;
  std::size_t circuits = 0;
  std::uint64_t shots = 0;
};

/// Greedy plan over `graph` plus one group of single-qubit patches for the
/// qubits no edge covers. All qubits are measured in every circuit.
PatchPlan calibration_plan(const CouplingMap& graph, std::size_t k);

/// Runs 2^(widest patch) circuits per group with `shots_per_circuit` each.
PatchCalibration calibrate_patches(Backend& backend, const PatchPlan& plan,
                                   std::uint64_t shots_per_circuit);

/// Number of circuits calibrate_patches() would run.
std::size_t calibration_circuit_count(const PatchPlan& plan);

/// Correlation weights from isolated single- and pair-qubit calibrations of
/// every pair within `locality`.
CorrelationWeights measure_correlation_weights(Backend& backend, const CouplingMap& map,
                                               std::size_t locality,
                                               std::uint64_t shots_per_circuit);

/// One Bayes filter step of JIGSAW: rescales the global table on the bits of
/// `pair` towards `sub` (a distribution over local pair indices). Subsets
/// whose mass lies strictly between 0 and epsilon are frozen. Returns false
/// when the sub-table has no weight on any active subset (table unchanged).
bool jigsaw_update(std::vector<Distribution::Entry>& table, const std::vector<Qubit>& pair,
                   const std::vector<double>& sub, double epsilon);

}  // namespace cmc

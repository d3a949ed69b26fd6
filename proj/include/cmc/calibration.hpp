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
#include <string>
#include <vector>

#include <json.hpp>

#include "cmc/bits.hpp"
#include "cmc/calibration_matrix.hpp"
#include "cmc/distribution.hpp"
#include "cmc/topology.hpp"

namespace cmc {

// ---------------------------------------------------------------------------
// Preparation and estimation

/// One calibration circuit: X on every qubit in `x_mask`, identity elsewhere.
struct PreparationSpec {
  std::size_t basis_index = 0;
  BasisState x_mask = 0;
};

/// 2^p preparations of a single patch, in basis-index order.
std::vector<PreparationSpec> preparation_circuits(const Patch& support);

/// Merged preparations for a group of non-interacting patches. Circuit b
/// prepares local index (b mod 2^p) on every patch of size p, so the circuit
/// count is 2^(largest patch size).
std::vector<PreparationSpec> preparation_circuits(const std::vector<Patch>& group);

/// Outcome counts for one prepared basis state of a support. Local indices
/// use support[0] as the most significant bit.
struct CountsRecord {
  std::vector<Qubit> support;
  std::size_t prepared = 0;
  std::map<std::size_t, std::uint64_t> counts;
  std::uint64_t shots = 0;
  std::string device;
  std::string timestamp;

  friend bool operator==(const CountsRecord&, const CountsRecord&) = default;
};

/// Bitstring over a support: character i is the bit of support[i].
std::string local_bitstring(std::size_t local, std::size_t width);
std::size_t parse_local_bitstring(std::string_view bits, std::size_t width);

nlohmann::json to_json(const CountsRecord& record);
CountsRecord counts_record_from_json(const nlohmann::json& j);

/// Column c holds the observed frequencies for prepared state c.
CalibrationMatrix estimate_matrix(const std::vector<CountsRecord>& records);

// ---------------------------------------------------------------------------
// Joining

/// Order parameter of one qubit inside one patch.
struct SharedOrder {
  Qubit qubit = 0;
  std::size_t multiplicity = 1;  // v
  std::size_t order = 0;         // v_a
};

/// (A_1 (x) ... (x) A_p)^-1 C (B_1 (x) ... (x) B_p)^-1 with
/// A = C_j^((v - 1 - v_a)/v) and B = C_j^(v_a/v) at the position of each
/// listed qubit j (identity elsewhere). C_j is the normalised partial trace of
/// C onto j.
Matrix order_adjust(const CalibrationMatrix& c, const std::vector<SharedOrder>& shared);
Matrix order_adjust(const CalibrationMatrix& c, Qubit shared, std::size_t v, std::size_t v_a);

struct SharedQubit {
  std::size_t multiplicity = 0;
  std::map<std::size_t, std::size_t> order;  // patch index -> v_a
};

/// Patch matrices in application order and the order parameters of every
/// qubit that appears in them.
struct JoinPlan {
  std::vector<CalibrationMatrix> patches;
  std::map<Qubit, SharedQubit> shared;

  /// Order parameters of the qubits of patch `index` that appear in more than
  /// one patch.
  std::vector<SharedOrder> orders_for(std::size_t index) const;
};

/// Sorts patches by support and hands out v_a = 0, 1, ... per qubit in that
/// order. Rejects duplicate supports and pairs of patches sharing more than
/// one qubit.
JoinPlan make_join_plan(std::vector<CalibrationMatrix> patches);

/// Throws unless every qubit's order values form a permutation of 0..v-1.
void validate_join_plan(const JoinPlan& plan);

/// One local factor of a sparse calibration.
struct Factor {
  std::vector<Qubit> support;
  Matrix matrix;
};

enum class Direction { forward, inverse };

/// Ordered local factors. Forward factors are applied first-to-last, so the
/// dense operator is F_last ... F_1.
struct SparseCalibration {
  std::vector<Factor> factors;
  Direction direction = Direction::forward;
};

/// Order-adjusted patch matrices in plan order.
SparseCalibration join(const JoinPlan& plan);

struct AssembledCalibration {
  SparseCalibration calibration;
  std::vector<Qubit> uncovered;  // measured qubits without any patch
};

/// Calibration restricted to `measured`. Patches inside the set are
/// order-adjusted as in join(). A patch straddling the boundary is traced onto
/// its measured qubits: for a qubit covered only by straddling patches the
/// traces are combined as |prod Tr(C)^(1/v)| into one factor at the first such
/// patch; otherwise each straddling patch contributes Tr(C)^(1/v) at its own
/// position. Uncovered measured qubits receive an identity factor.
AssembledCalibration assemble_for_measured(const JoinPlan& plan,
                                           const std::vector<Qubit>& measured);

/// Inverts every factor and reverses the order.
SparseCalibration invert(const SparseCalibration& sc);

inline constexpr double kDefaultCullThreshold = 1e-12;

/// Applies the factors in stored order as sparse products over the outcome
/// map. After each factor, entries below cull_threshold times the total
/// absolute weight are dropped. The result is clamped and renormalised.
Distribution apply(const SparseCalibration& sc, const Distribution& d,
                   double cull_threshold = kDefaultCullThreshold);

/// Same as apply() without the final clamp (quasi-probabilities kept).
Distribution apply_raw(const SparseCalibration& sc, const Distribution& d,
                       double cull_threshold = kDefaultCullThreshold);

/// I (x) m (x) I over an n-qubit register in dense order (qubit 0 most
/// significant).
Matrix embed_factor(const Factor& f, std::size_t num_qubits);

/// F_last ... F_1 as a dense 2^n matrix. Small registers only.
Matrix dense_matrix(const SparseCalibration& sc, std::size_t num_qubits);

/// Dense probability vector indexed by dense_index().
Eigen::VectorXd to_dense(const Distribution& d);
Distribution from_dense(const Eigen::VectorXd& v, std::size_t num_qubits);

nlohmann::json to_json(const Factor& f);
Factor factor_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CalibrationMatrix& c);
CalibrationMatrix calibration_matrix_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SparseCalibration& sc);
SparseCalibration sparse_calibration_from_json(const nlohmann::json& j);

}  // namespace cmc

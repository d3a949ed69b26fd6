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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cmc/bits.hpp"
#include "cmc/calibration.hpp"
#include "cmc/calibration_matrix.hpp"
#include "cmc/distribution.hpp"
#include "cmc/topology.hpp"

namespace cmc {

/// Ground-truth readout channel. Same shape as a calibration matrix.
using MeasurementChannel = CalibrationMatrix;

/// [[1 - p01, p10], [p01, 1 - p10]] on one qubit.
MeasurementChannel state_dependent_channel(Qubit q, double p01, double p10);

enum class CorrelatedKind { pairwise_flip, triplet_flip, flip_all, joint_decay };

CorrelatedKind parse_correlated_kind(std::string_view name);
std::string to_string(CorrelatedKind kind);

/// With probability p the joint error happens, otherwise nothing:
///  - pairwise_flip (2 qubits), triplet_flip (3), flip_all (any width): every
///    observed bit of the support is inverted;
///  - joint_decay (any width): the all-ones outcome is read as all zeros.
MeasurementChannel correlated_channel(const std::vector<Qubit>& support, CorrelatedKind kind,
                                      double p);

/// Dense product of the embedded channels in list order (first applied first).
Matrix compose(const std::vector<MeasurementChannel>& channels, std::size_t num_qubits);

struct ReadoutRates {
  double p01 = 0.0;
  double p10 = 0.0;
  friend bool operator==(const ReadoutRates&, const ReadoutRates&) = default;
};

/// Per-qubit readout flips, then correlated channels in list order. A
/// correlated channel acts only when its whole support is measured.
/// `gate_flip` is the probability of an X error on each qubit a gate touches.
struct NoiseSpec {
  std::size_t num_qubits = 0;
  std::vector<ReadoutRates> per_qubit;
  std::vector<MeasurementChannel> correlated;
  double gate_flip = 0.0;

  static NoiseSpec noiseless(std::size_t num_qubits);
  void validate() const;
  /// Channel factors active when `measured` qubits are read out.
  SparseCalibration channel_for(const std::vector<Qubit>& measured) const;
};

/// Independent p01, p10 ~ U[low, high] per qubit.
NoiseSpec random_readout_noise(std::size_t num_qubits, double low, double high,
                               std::uint64_t seed);

nlohmann::json to_json(const NoiseSpec& spec);
NoiseSpec noise_spec_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Circuits

struct Gate {
  enum class Kind { h, x, cnot };
  Kind kind = Kind::x;
  Qubit target = 0;
  Qubit control = 0;  // cnot only
};

/// Classically simulable circuits: H is only allowed on a qubit no earlier
/// gate has touched, which keeps every branch a computational basis state.
struct Circuit {
  std::size_t num_qubits = 0;
  std::vector<Gate> gates;
  std::vector<Qubit> measured;  // empty: all qubits

  std::vector<Qubit> measured_qubits() const;
  Circuit& h(Qubit q);
  Circuit& x(Qubit q);
  Circuit& cnot(Qubit control, Qubit target);
  /// Appends X on every qubit in `mask`.
  Circuit& x_mask(BasisState mask);
  void validate() const;
};

/// Noiseless outcome distribution (marginal on the measured qubits, other bits
/// cleared).
Distribution ideal_distribution(const Circuit& circuit);

/// {0^n: 1/2, 1^n: 1/2}.
Distribution ideal_ghz(std::size_t num_qubits);

/// Breadth-first tree of (control, target) pairs from `root`.
std::vector<std::pair<Qubit, Qubit>> ghz_cnot_schedule(const CouplingMap& map, Qubit root = 0);

Circuit ghz_circuit(const CouplingMap& map, Qubit root = 0);

// ---------------------------------------------------------------------------
// Execution

/// Simulated device. In sampled mode each shot propagates one basis state
/// through the gates and the readout channels. In exact mode the output is
/// the infinite-shot distribution. Circuits and shots are counted.
class Backend {
 public:
  Backend(NoiseSpec noise, std::uint64_t seed, bool exact = false);

  const NoiseSpec& noise() const { return noise_; }
  bool exact() const { return exact_; }

  Counts sample(const Circuit& circuit, std::uint64_t shots);
  Distribution exact_distribution(const Circuit& circuit);
  /// Exact distribution in exact mode, otherwise empirical frequencies.
  Distribution execute(const Circuit& circuit, std::uint64_t shots);

  std::size_t circuits_run() const { return circuits_; }
  std::uint64_t shots_run() const { return shots_; }

 private:
  NoiseSpec noise_;
  Rng rng_;
  bool exact_;
  std::size_t circuits_ = 0;
  std::uint64_t shots_ = 0;
};

/// Seeded sampling of `shots` outcomes from `ideal` pushed through `channel`.
Counts simulate_counts(const Distribution& ideal, const SparseCalibration& channel,
                       std::uint64_t shots, std::uint64_t seed);

struct XChainPoint {
  std::size_t depth = 0;
  int ideal_bit = 0;
  double error_rate = 0.0;
  double expected = 0.0;  // closed form for the one-bit Markov chain
};

/// One qubit, d X gates, measured. Depths 1..depth_max.
std::vector<XChainPoint> x_chain_experiment(std::size_t depth_max, ReadoutRates rates,
                                            double gate_flip, std::uint64_t shots,
                                            std::uint64_t seed);

}  // namespace cmc

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
#include <utility>
#include <vector>

#include "cmc/bits.hpp"

namespace cmc {

using Counts = std::map<BasisState, std::uint64_t>;

/// Sparse weight vector over the basis states of an n-qubit register.
///
/// Entries are kept sorted by state and never contain duplicates. Weights may
/// be negative while an inverse calibration is being applied; `finalized()`
/// clamps them and renormalises to unit mass.
class Distribution {
 public:
  using Entry = std::pair<BasisState, double>;

  Distribution() = default;
  explicit Distribution(std::size_t num_qubits);
  Distribution(std::size_t num_qubits, std::vector<Entry> entries);

  static Distribution point_mass(std::size_t num_qubits, BasisState state);
  static Distribution from_counts(std::size_t num_qubits, const Counts& counts);

  std::size_t num_qubits() const { return num_qubits_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  double probability(BasisState state) const;
  double total() const;

  /// Negative weights clamped to zero, then rescaled to sum to one.
  Distribution finalized() const;

  /// Marginal over `qubits`; other bits are cleared in the resulting keys.
  Distribution marginal(std::span<const Qubit> qubits) const;

  /// Relabels every outcome by XOR with `mask`.
  Distribution xored(BasisState mask) const;

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::size_t num_qubits_ = 0;
  std::vector<Entry> entries_;
};

/// Builds a distribution from an unordered accumulation, dropping exact zeros.
Distribution make_distribution(std::size_t num_qubits,
                               const std::vector<Distribution::Entry>& unsorted);

}  // namespace cmc

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

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cmc {

using Qubit = std::size_t;

// Computational basis state of a register: bit q holds the outcome of qubit q.
using BasisState = std::uint64_t;

inline constexpr std::size_t kMaxRegisterSize = 64;

// Bitstrings are written with character q holding qubit q (qubit 0 leftmost).
std::string to_bitstring(BasisState state, std::size_t num_qubits);
BasisState from_bitstring(std::string_view bits);

// Local index of `state` restricted to `support`. support[0] is the most
// significant bit, so the index matches the Kronecker ordering
// C_{support[0]} (x) C_{support[1]} (x) ...
std::size_t gather_bits(BasisState state, std::span<const Qubit> support);

// Inverse of gather_bits: places a local index back onto `support`.
BasisState scatter_bits(std::size_t local, std::span<const Qubit> support);

BasisState support_mask(std::span<const Qubit> support);

// Row/column index of `state` in a dense 2^n operator written as
// M_0 (x) M_1 (x) ... (x) M_{n-1}.
std::size_t dense_index(BasisState state, std::size_t num_qubits);
BasisState from_dense_index(std::size_t index, std::size_t num_qubits);

// Deterministic random source shared by the simulator and the strategies.
using Rng = std::mt19937_64;

// Uniform double in [0, 1) built from the top 53 bits, independent of the
// standard library's distribution implementations.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// splitmix64 finaliser; used to derive independent per-trial streams.
std::uint64_t mix_seed(std::uint64_t seed);

}  // namespace cmc

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

#include "cmc/bits.hpp"

#include <stdexcept>

namespace cmc {

std::string to_bitstring(BasisState state, std::size_t num_qubits) {
  if (num_qubits > kMaxRegisterSize) {
    throw std::invalid_argument("register larger than 64 qubits");
  }
  std::string out(num_qubits, '0');
  for (std::size_t q = 0; q < num_qubits; ++q) {
    if ((state >> q) & 1U) out[q] = '1';
  }
  return out;
}

BasisState from_bitstring(std::string_view bits) {
  if (bits.size() > kMaxRegisterSize) {
    throw std::invalid_argument("bitstring longer than 64 characters");
  }
  BasisState state = 0;
  for (std::size_t q = 0; q < bits.size(); ++q) {
    if (bits[q] == '1') {
      state |= BasisState{1} << q;
    } else if (bits[q] != '0') {
      throw std::invalid_argument("bitstring contains a character other than 0/1: " +
                                  std::string(bits));
    }
  }
  return state;
}

std::size_t gather_bits(BasisState state, std::span<const Qubit> support) {
  std::size_t local = 0;
  for (const Qubit q : support) {
    local = (local << 1) | static_cast<std::size_t>((state >> q) & 1U);
  }
  return local;
}

BasisState scatter_bits(std::size_t local, std::span<const Qubit> support) {
  BasisState state = 0;
  const std::size_t p = support.size();
  for (std::size_t k = 0; k < p; ++k) {
    if ((local >> (p - 1 - k)) & 1U) state |= BasisState{1} << support[k];
  }
  return state;
}

BasisState support_mask(std::span<const Qubit> support) {
  BasisState mask = 0;
  for (const Qubit q : support) mask |= BasisState{1} << q;
  return mask;
}

std::size_t dense_index(BasisState state, std::size_t num_qubits) {
  std::size_t index = 0;
  for (std::size_t q = 0; q < num_qubits; ++q) {
    index = (index << 1) | static_cast<std::size_t>((state >> q) & 1U);
  }
  return index;
}

BasisState from_dense_index(std::size_t index, std::size_t num_qubits) {
  BasisState state = 0;
  for (std::size_t q = 0; q < num_qubits; ++q) {
    if ((index >> (num_qubits - 1 - q)) & 1U) state |= BasisState{1} << q;
  }
  return state;
}

std::uint64_t mix_seed(std::uint64_t seed) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace cmc

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

#include "cmc/distribution.hpp"

#include <algorithm>
#include <stdexcept>

namespace cmc {

namespace {

void check_register(std::size_t num_qubits) {
  if (num_qubits > kMaxRegisterSize) {
    throw std::invalid_argument("distribution register larger than 64 qubits");
  }
}

}  // namespace

Distribution::Distribution(std::size_t num_qubits) : num_qubits_(num_qubits) {
  check_register(num_qubits);
}

Distribution::Distribution(std::size_t num_qubits, std::vector<Entry> entries)
    : num_qubits_(num_qubits), entries_(std::move(entries)) {
  check_register(num_qubits);
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i].first == entries_[i - 1].first) {
      throw std::invalid_argument("duplicate basis state in distribution");
    }
  }
  const BasisState limit =
      num_qubits_ == 64 ? ~BasisState{0} : (BasisState{1} << num_qubits_) - 1;
  if (!entries_.empty() && entries_.back().first > limit) {
    throw std::invalid_argument("basis state outside the register");
  }
}

Distribution Distribution::point_mass(std::size_t num_qubits, BasisState state) {
  return Distribution(num_qubits, {{state, 1.0}});
}

Distribution Distribution::from_counts(std::size_t num_qubits, const Counts& counts) {
  std::uint64_t shots = 0;
  for (const auto& [state, c] : counts) shots += c;
  if (shots == 0) throw std::invalid_argument("counts contain no shots");
  std::vector<Entry> entries;
  entries.reserve(counts.size());
  for (const auto& [state, c] : counts) {
    if (c > 0) {
      entries.emplace_back(state, static_cast<double>(c) / static_cast<double>(shots));
    }
  }
  return Distribution(num_qubits, std::move(entries));
}

double Distribution::probability(BasisState state) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), state,
                             [](const Entry& e, BasisState s) { return e.first < s; });
  return (it != entries_.end() && it->first == state) ? it->second : 0.0;
}

double Distribution::total() const {
  double sum = 0.0;
  for (const auto& e : entries_) sum += e.second;
  return sum;
}

Distribution Distribution::finalized() const {
  std::vector<Entry> kept;
  kept.reserve(entries_.size());
  double sum = 0.0;
  for (const auto& [state, w] : entries_) {
    if (w > 0.0) {
      kept.emplace_back(state, w);
      sum += w;
    }
  }
  if (sum <= 0.0) {
    throw std::runtime_error("distribution has no positive mass after clamping");
  }
  for (auto& e : kept) e.second /= sum;
  Distribution out(num_qubits_);
  out.entries_ = std::move(kept);
  return out;
}

Distribution Distribution::marginal(std::span<const Qubit> qubits) const {
  for (const Qubit q : qubits) {
    if (q >= num_qubits_) throw std::out_of_range("marginal qubit outside register");
  }
  const BasisState mask = support_mask(qubits);
  std::vector<Entry> acc;
  acc.reserve(entries_.size());
  for (const auto& [state, w] : entries_) acc.emplace_back(state & mask, w);
  return make_distribution(num_qubits_, acc);
}

Distribution Distribution::xored(BasisState mask) const {
  std::vector<Entry> out;
  out.reserve(entries_.size());
  for (const auto& [state, w] : entries_) out.emplace_back(state ^ mask, w);
  return Distribution(num_qubits_, std::move(out));
}

Distribution make_distribution(std::size_t num_qubits,
                               const std::vector<Distribution::Entry>& unsorted) {
  std::vector<Distribution::Entry> sorted = unsorted;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Distribution::Entry> merged;
  merged.reserve(sorted.size());
  for (const auto& e : sorted) {
    if (!merged.empty() && merged.back().first == e.first) {
      merged.back().second += e.second;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const auto& e) { return e.second == 0.0; });
  return Distribution(num_qubits, std::move(merged));
}

}  // namespace cmc

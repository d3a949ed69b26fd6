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

#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cmc/bits.hpp"
#include "cmc/calibration_matrix.hpp"

namespace cmc {

/// Unordered qubit pair stored with a < b.
struct Edge {
  Qubit a = 0;
  Qubit b = 0;

  static Edge of(Qubit x, Qubit y) { return x < y ? Edge{x, y} : Edge{y, x}; }
  bool contains(Qubit q) const { return q == a || q == b; }
  Qubit other(Qubit q) const { return q == a ? b : a; }

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class CouplingMap {
 public:
  CouplingMap() = default;
  /// Rejects self-loops, duplicates (in either orientation) and out-of-range
  /// endpoints. Edges are stored sorted.
  CouplingMap(std::size_t num_qubits, std::vector<Edge> edges);

  std::size_t num_qubits() const { return num_qubits_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Qubit>& neighbors(Qubit q) const { return adjacency_.at(q); }
  bool has_edge(Qubit x, Qubit y) const;

  friend bool operator==(const CouplingMap&, const CouplingMap&) = default;

 private:
  std::size_t num_qubits_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Qubit>> adjacency_;
};

enum class ArchitectureKind { linear, grid, local_grid, heavy_hex, octagonal, fully_connected };

ArchitectureKind parse_architecture_kind(std::string_view name);
std::string to_string(ArchitectureKind kind);

/// Either a qubit count (linear, fully_connected, and count-truncated heavy_hex
/// and octagonal lattices) or a rows x cols tiling.
struct ArchitectureParams {
  std::size_t num_qubits = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// Constructs a device graph.
///
///  - linear: path over n qubits (n - 1 edges).
///  - grid: rows x cols square lattice (2rc - r - c edges).
///  - local_grid: square lattice plus both diagonals in every cell whose
///    top-left corner has even (row + col).
///  - heavy_hex: IBM heavy-hex lattice. With rows/cols, `rows` horizontal chains
///    of 4*cols + 1 qubits are joined by bridge qubits at every fourth column,
///    alternating offset between successive row gaps. With only num_qubits, the
///    first n qubits in breadth-first order of a large lattice are kept.
///  - octagonal: Rigetti-style rings of eight qubits on a rows x cols tiling,
///    neighbouring rings joined by two edges. num_qubits alone truncates the
///    same way as heavy_hex.
///  - fully_connected: complete graph (n(n - 1)/2 edges).
CouplingMap generate_architecture(ArchitectureKind kind, const ArchitectureParams& params);

/// The 20-qubit IBM Tokyo layout (35 edges).
CouplingMap tokyo_coupling_map();
/// The 7-qubit IBM Nairobi layout (H-shaped, 6 edges).
CouplingMap nairobi_coupling_map();
/// The 5-qubit IBM Quito/Lima/Belem layout (T-shaped, 4 edges).
CouplingMap quito_coupling_map();

/// Connected random graph: a random spanning tree plus uniformly random extra
/// edges until the average degree reaches `mean_degree`.
CouplingMap random_coupling_map(std::size_t num_qubits, double mean_degree,
                                std::uint64_t seed);

inline constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

/// Breadth-first distances from a set of sources; kUnreachable where no path
/// exists. Neighbours are visited in ascending order.
std::vector<std::size_t> bfs_distances(const CouplingMap& map, std::span<const Qubit> sources);

std::size_t graph_distance(const CouplingMap& map, Qubit i, Qubit j);

bool is_connected(const CouplingMap& map);

using Patch = std::vector<Qubit>;

/// Patches grouped so that every patch of a group can be calibrated in the
/// same circuits: within a group, patches are more than `separation` apart.
struct PatchPlan {
  std::vector<std::vector<Patch>> groups;
  std::size_t separation = 1;

  std::size_t num_groups() const { return groups.size(); }
  std::size_t num_patches() const;
  /// Patches in group order.
  std::vector<Patch> patches() const;

  friend bool operator==(const PatchPlan&, const PatchPlan&) = default;
};

/// Greedy distance-k patch construction over the edges of `map`.
///
/// Uncovered edges are consumed in lexicographic order. Each group is seeded
/// with the smallest uncovered edge and grown by sweeping the graph outwards
/// from the seed (neighbours in ascending order); an uncovered edge joins the
/// group when both endpoints lie further than `k` from every qubit already in
/// the group.
PatchPlan greedy_patch_plan(const CouplingMap& map, std::size_t k);

/// Smallest graph distance between any qubit of `x` and any qubit of `y`.
std::size_t patch_distance(const CouplingMap& map, const Patch& x, const Patch& y);

/// Pairs (i < j) at graph distance 1..locality.
std::vector<Edge> candidate_pairs(const CouplingMap& map, std::size_t locality);

struct CorrelationWeights {
  std::map<Edge, double> weights;
  std::size_t locality = 1;
};

/// w_ij = || C_i (x) C_j - C_ij ||_F for each pair matrix.
CorrelationWeights correlation_weights(const std::map<Qubit, CalibrationMatrix>& singles,
                                       const std::map<Edge, CalibrationMatrix>& pairs,
                                       std::size_t locality);

/// Error coupling map: the strongest correlations, at most max_edges of them.
struct ErrMap {
  std::vector<Edge> edges;  // in selection order
  std::size_t max_edges = 0;

  CouplingMap as_coupling_map(std::size_t num_qubits) const;
  friend bool operator==(const ErrMap&, const ErrMap&) = default;
};

/// Greedy selection over weights in descending order (ties: lexicographic
/// pair order):
///  - exactly one endpoint already present: add the other endpoint and edge;
///  - neither present: add the edge, then attach the next-heaviest remaining
///    edge touching either endpoint as a dangling edge;
///  - both present: add the edge.
/// Stops once max_edges edges are selected.
ErrMap err_map(const CorrelationWeights& weights, std::size_t max_edges);

nlohmann::json to_json(const CouplingMap& map);
CouplingMap coupling_map_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PatchPlan& plan);
PatchPlan patch_plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ErrMap& map);
ErrMap err_map_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CorrelationWeights& weights);

}  // namespace cmc

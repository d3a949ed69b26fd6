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

#include "cmc/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>

namespace cmc {

// ---------------------------------------------------------------------------
// CouplingMap

CouplingMap::CouplingMap(std::size_t num_qubits, std::vector<Edge> edges)
    : num_qubits_(num_qubits), adjacency_(num_qubits) {
  if (num_qubits == 0) throw std::invalid_argument("coupling map needs at least one qubit");
  for (Edge& e : edges) {
    if (e.a == e.b) throw std::invalid_argument("self-loop on qubit " + std::to_string(e.a));
    e = Edge::of(e.a, e.b);
    if (e.b >= num_qubits) {
      throw std::invalid_argument("edge endpoint " + std::to_string(e.b) + " outside register");
    }
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw std::invalid_argument("duplicate edge in coupling map");
  }
  edges_ = std::move(edges);
  for (const Edge& e : edges_) {
    adjacency_[e.a].push_back(e.b);
    adjacency_[e.b].push_back(e.a);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

bool CouplingMap::has_edge(Qubit x, Qubit y) const {
  if (x == y) return false;
  return std::binary_search(edges_.begin(), edges_.end(), Edge::of(x, y));
}

// ---------------------------------------------------------------------------
// Generators

ArchitectureKind parse_architecture_kind(std::string_view name) {
  if (name == "linear") return ArchitectureKind::linear;
  if (name == "grid") return ArchitectureKind::grid;
  if (name == "local_grid") return ArchitectureKind::local_grid;
  if (name == "heavy_hex") return ArchitectureKind::heavy_hex;
  if (name == "octagonal") return ArchitectureKind::octagonal;
  if (name == "fully_connected") return ArchitectureKind::fully_connected;
  throw std::invalid_argument("unknown architecture kind: " + std::string(name));
}

std::string to_string(ArchitectureKind kind) {
  switch (kind) {
    case ArchitectureKind::linear: return "linear";
    case ArchitectureKind::grid: return "grid";
    case ArchitectureKind::local_grid: return "local_grid";
    case ArchitectureKind::heavy_hex: return "heavy_hex";
    case ArchitectureKind::octagonal: return "octagonal";
    case ArchitectureKind::fully_connected: return "fully_connected";
  }
  return "unknown";
}

namespace {

CouplingMap linear_map(std::size_t n) {
  std::vector<Edge> edges;
  for (Qubit q = 0; q + 1 < n; ++q) edges.push_back({q, q + 1});
  return CouplingMap(n, std::move(edges));
}

CouplingMap grid_map(std::size_t rows, std::size_t cols, bool diagonals) {
  auto id = [cols](std::size_t r, std::size_t c) { return r * cols + c; };
  std::vector<Edge> edges;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.push_back({id(r, c), id(r, c + 1)});
      if (r + 1 < rows) edges.push_back({id(r, c), id(r + 1, c)});
      if (diagonals && r + 1 < rows && c + 1 < cols && (r + c) % 2 == 0) {
        edges.push_back({id(r, c), id(r + 1, c + 1)});
        edges.push_back({id(r, c + 1), id(r + 1, c)});
      }
    }
  }
  return CouplingMap(rows * cols, std::move(edges));
}

CouplingMap heavy_hex_map(std::size_t rows, std::size_t cols) {
  const std::size_t width = 4 * cols + 1;
  std::vector<Edge> edges;
  auto chain = [width](std::size_t r, std::size_t c) { return r * width + c; };
  Qubit next = rows * width;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c + 1 < width; ++c) edges.push_back({chain(r, c), chain(r, c + 1)});
  }
  for (std::size_t r = 0; r + 1 < rows; ++r) {
    const std::size_t offset = (r % 2 == 0) ? 0 : 2;
    for (std::size_t c = offset; c < width; c += 4) {
      const Qubit bridge = next++;
      edges.push_back({chain(r, c), bridge});
      edges.push_back({chain(r + 1, c), bridge});
    }
  }
  return CouplingMap(next, std::move(edges));
}

CouplingMap octagonal_map(std::size_t rows, std::size_t cols) {
  // Ring positions run clockwise: 0,1 top; 2,3 right; 4,5 bottom; 6,7 left.
  auto id = [cols](std::size_t r, std::size_t c, std::size_t pos) {
    return (r * cols + c) * 8 + pos;
  };
  std::vector<Edge> edges;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::size_t pos = 0; pos < 8; ++pos) {
        edges.push_back({id(r, c, pos), id(r, c, (pos + 1) % 8)});
      }
      if (c + 1 < cols) {
        edges.push_back({id(r, c, 2), id(r, c + 1, 7)});
        edges.push_back({id(r, c, 3), id(r, c + 1, 6)});
      }
      if (r + 1 < rows) {
        edges.push_back({id(r, c, 5), id(r + 1, c, 0)});
        edges.push_back({id(r, c, 4), id(r + 1, c, 1)});
      }
    }
  }
  return CouplingMap(rows * cols * 8, std::move(edges));
}

// Induced subgraph on the first n vertices in breadth-first order from qubit 0,
// relabelled in that order. The result is connected.
CouplingMap bfs_truncate(const CouplingMap& big, std::size_t n) {
  if (n > big.num_qubits()) throw std::invalid_argument("truncation larger than lattice");
  std::vector<Qubit> order;
  std::vector<bool> seen(big.num_qubits(), false);
  std::deque<Qubit> queue{0};
  seen[0] = true;
  while (!queue.empty() && order.size() < n) {
    const Qubit u = queue.front();
    queue.pop_front();
    order.push_back(u);
    for (Qubit w : big.neighbors(u)) {
      if (!seen[w]) {
        seen[w] = true;
        queue.push_back(w);
      }
    }
  }
  std::vector<std::size_t> relabel(big.num_qubits(), kUnreachable);
  for (std::size_t i = 0; i < order.size(); ++i) relabel[order[i]] = i;
  std::vector<Edge> edges;
  for (const Edge& e : big.edges()) {
    if (relabel[e.a] != kUnreachable && relabel[e.b] != kUnreachable) {
      edges.push_back(Edge::of(relabel[e.a], relabel[e.b]));
    }
  }
  return CouplingMap(n, std::move(edges));
}

void require_positive(std::size_t value, const char* what) {
  if (value == 0) throw std::invalid_argument(std::string(what) + " must be positive");
}

}  // namespace

CouplingMap generate_architecture(ArchitectureKind kind, const ArchitectureParams& params) {
  const bool tiled = params.rows > 0 || params.cols > 0;
  if (tiled) {
    require_positive(params.rows, "rows");
    require_positive(params.cols, "columns");
  }
  switch (kind) {
    case ArchitectureKind::linear:
      require_positive(params.num_qubits, "qubit count");
      return linear_map(params.num_qubits);
    case ArchitectureKind::fully_connected: {
      require_positive(params.num_qubits, "qubit count");
      std::vector<Edge> edges;
      for (Qubit i = 0; i < params.num_qubits; ++i) {
        for (Qubit j = i + 1; j < params.num_qubits; ++j) edges.push_back({i, j});
      }
      return CouplingMap(params.num_qubits, std::move(edges));
    }
    case ArchitectureKind::grid:
    case ArchitectureKind::local_grid: {
      if (!tiled) throw std::invalid_argument("grid architectures need rows and columns");
      return grid_map(params.rows, params.cols, kind == ArchitectureKind::local_grid);
    }
    case ArchitectureKind::heavy_hex:
      if (tiled) return heavy_hex_map(params.rows, params.cols);
      require_positive(params.num_qubits, "qubit count");
      {
        std::size_t side = 1;
        while (heavy_hex_map(side, side).num_qubits() < params.num_qubits) ++side;
        return bfs_truncate(heavy_hex_map(side, side), params.num_qubits);
      }
    case ArchitectureKind::octagonal:
      if (tiled) return octagonal_map(params.rows, params.cols);
      require_positive(params.num_qubits, "qubit count");
      {
        std::size_t side = 1;
        while (octagonal_map(side, side).num_qubits() < params.num_qubits) ++side;
        return bfs_truncate(octagonal_map(side, side), params.num_qubits);
      }
  }
  throw std::invalid_argument("unknown architecture kind");
}

CouplingMap tokyo_coupling_map() {
  return CouplingMap(20, {{0, 1},   {0, 5},   {1, 2},   {1, 6},   {1, 7},   {2, 6},   {3, 8},
                          {4, 8},   {4, 9},   {5, 6},   {5, 10},  {5, 11},  {6, 7},   {6, 10},
                          {6, 11},  {7, 8},   {7, 12},  {8, 9},   {8, 12},  {8, 13},  {10, 11},
                          {10, 15}, {11, 12}, {11, 16}, {11, 17}, {12, 13}, {12, 16}, {13, 14},
                          {13, 18}, {13, 19}, {14, 18}, {14, 19}, {15, 16}, {16, 17}, {17, 18}});
}

CouplingMap nairobi_coupling_map() {
  return CouplingMap(7, {{0, 1}, {1, 2}, {1, 3}, {3, 5}, {4, 5}, {5, 6}});
}

CouplingMap quito_coupling_map() {
  return CouplingMap(5, {{0, 1}, {1, 2}, {1, 3}, {3, 4}});
}

CouplingMap random_coupling_map(std::size_t num_qubits, double mean_degree,
                                std::uint64_t seed) {
  require_positive(num_qubits, "qubit count");
  Rng rng(seed);
  std::set<Edge> edges;
  for (Qubit q = 1; q < num_qubits; ++q) {
    const auto parent = static_cast<Qubit>(uniform01(rng) * static_cast<double>(q));
    edges.insert(Edge::of(parent, q));
  }
  const std::size_t max_edges = num_qubits * (num_qubits - 1) / 2;
  const auto target = std::min<std::size_t>(
      max_edges, static_cast<std::size_t>(std::llround(mean_degree * num_qubits / 2.0)));
  while (edges.size() < target) {
    const auto x = static_cast<Qubit>(uniform01(rng) * static_cast<double>(num_qubits));
    const auto y = static_cast<Qubit>(uniform01(rng) * static_cast<double>(num_qubits));
    if (x != y) edges.insert(Edge::of(x, y));
  }
  return CouplingMap(num_qubits, std::vector<Edge>(edges.begin(), edges.end()));
}

// ---------------------------------------------------------------------------
// Distances

std::vector<std::size_t> bfs_distances(const CouplingMap& map, std::span<const Qubit> sources) {
  std::vector<std::size_t> dist(map.num_qubits(), kUnreachable);
  std::deque<Qubit> queue;
  for (Qubit s : sources) {
    if (s >= map.num_qubits()) throw std::out_of_range("qubit index outside coupling map");
    if (dist[s] != 0) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const Qubit u = queue.front();
    queue.pop_front();
    for (Qubit w : map.neighbors(u)) {
      if (dist[w] == kUnreachable) {
        dist[w] = dist[u] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

std::size_t graph_distance(const CouplingMap& map, Qubit i, Qubit j) {
  if (i >= map.num_qubits() || j >= map.num_qubits()) {
    throw std::out_of_range("qubit index outside coupling map");
  }
  const Qubit src[] = {i};
  return bfs_distances(map, src)[j];
}

bool is_connected(const CouplingMap& map) {
  const Qubit src[] = {0};
  const auto dist = bfs_distances(map, src);
  return std::none_of(dist.begin(), dist.end(), [](std::size_t d) { return d == kUnreachable; });
}

// ---------------------------------------------------------------------------
// Patch planning

std::size_t PatchPlan::num_patches() const {
  std::size_t total = 0;
  for (const auto& g : groups) total += g.size();
  return total;
}

std::vector<Patch> PatchPlan::patches() const {
  std::vector<Patch> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

namespace {

// Marks every vertex within `radius` of `sources` in `blocked`.
void block_ball(const CouplingMap& map, std::span<const Qubit> sources, std::size_t radius,
                std::vector<bool>& blocked) {
  std::vector<std::size_t> dist(map.num_qubits(), kUnreachable);
  std::deque<Qubit> queue;
  for (Qubit s : sources) {
    dist[s] = 0;
    blocked[s] = true;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const Qubit u = queue.front();
    queue.pop_front();
    if (dist[u] == radius) continue;
    for (Qubit w : map.neighbors(u)) {
      if (dist[w] == kUnreachable) {
        dist[w] = dist[u] + 1;
        blocked[w] = true;
        queue.push_back(w);
      }
    }
  }
}

}  // namespace

PatchPlan greedy_patch_plan(const CouplingMap& map, std::size_t k) {
  if (map.edges().empty()) throw std::invalid_argument("coupling map has no edges to patch");
  const std::size_t n = map.num_qubits();
  std::set<Edge> uncovered(map.edges().begin(), map.edges().end());
  PatchPlan plan;
  plan.separation = k;

  while (!uncovered.empty()) {
    std::vector<Patch> group;
    std::vector<bool> blocked(n, false);
    auto take = [&](const Edge& e) {
      uncovered.erase(e);
      group.push_back({e.a, e.b});
      const Qubit ends[] = {e.a, e.b};
      block_ball(map, ends, k, blocked);
    };
    const Edge seed = *uncovered.begin();
    take(seed);

    // Sweep outwards from the seed; restart from the lowest unvisited qubit
    // when a component is exhausted.
    std::vector<bool> visited(n, false);
    std::deque<Qubit> frontier{seed.a, seed.b};
    visited[seed.a] = visited[seed.b] = true;
    Qubit restart = 0;
    while (!uncovered.empty()) {
      if (frontier.empty()) {
        while (restart < n && visited[restart]) ++restart;
        if (restart == n) break;
        visited[restart] = true;
        frontier.push_back(restart);
      }
      const Qubit u = frontier.front();
      frontier.pop_front();
      for (Qubit w : map.neighbors(u)) {
        if (!visited[w]) {
          visited[w] = true;
          frontier.push_back(w);
        }
        const Edge e = Edge::of(u, w);
        if (!blocked[u] && !blocked[w] && uncovered.contains(e)) take(e);
      }
    }
    plan.groups.push_back(std::move(group));
  }
  return plan;
}

std::size_t patch_distance(const CouplingMap& map, const Patch& x, const Patch& y) {
  const auto dist = bfs_distances(map, x);
  std::size_t best = kUnreachable;
  for (Qubit q : y) best = std::min(best, dist.at(q));
  return best;
}

// ---------------------------------------------------------------------------
// Correlation weights and error maps

std::vector<Edge> candidate_pairs(const CouplingMap& map, std::size_t locality) {
  std::vector<Edge> out;
  for (Qubit i = 0; i < map.num_qubits(); ++i) {
    const Qubit src[] = {i};
    const auto dist = bfs_distances(map, src);
    for (Qubit j = i + 1; j < map.num_qubits(); ++j) {
      if (dist[j] != kUnreachable && dist[j] <= locality) out.push_back({i, j});
    }
  }
  return out;
}

CorrelationWeights correlation_weights(const std::map<Qubit, CalibrationMatrix>& singles,
                                       const std::map<Edge, CalibrationMatrix>& pairs,
                                       std::size_t locality) {
  CorrelationWeights out;
  out.locality = locality;
  for (const auto& [pair, joint] : pairs) {
    const auto first = singles.find(pair.a);
    const auto second = singles.find(pair.b);
    if (first == singles.end() || second == singles.end()) {
      throw std::invalid_argument("missing single-qubit calibration for pair (" +
                                  std::to_string(pair.a) + ", " + std::to_string(pair.b) + ")");
    }
    if (first->second.dim() != 2 || second->second.dim() != 2 || joint.dim() != 4 ||
        joint.support() != std::vector<Qubit>{pair.a, pair.b}) {
      throw std::invalid_argument("calibration support does not match its pair");
    }
    const Matrix product = kron(first->second.entries(), second->second.entries());
    out.weights[pair] = (product - joint.entries()).norm();
  }
  return out;
}

CouplingMap ErrMap::as_coupling_map(std::size_t num_qubits) const {
  return CouplingMap(num_qubits, edges);
}

ErrMap err_map(const CorrelationWeights& weights, std::size_t max_edges) {
  if (weights.weights.empty()) throw std::invalid_argument("no correlation weights");
  if (max_edges == 0) throw std::invalid_argument("error map budget must be positive");

  std::vector<std::pair<Edge, double>> ranked(weights.weights.begin(), weights.weights.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& x, const auto& y) { return x.second > y.second; });

  ErrMap out;
  out.max_edges = max_edges;
  std::set<Qubit> vertices;
  std::set<Edge> chosen;
  auto add = [&](const Edge& e) {
    if (out.edges.size() >= max_edges || chosen.contains(e)) return;
    chosen.insert(e);
    out.edges.push_back(e);
    vertices.insert(e.a);
    vertices.insert(e.b);
  };

  for (std::size_t idx = 0; idx < ranked.size() && out.edges.size() < max_edges; ++idx) {
    const Edge e = ranked[idx].first;
    const bool has_a = vertices.contains(e.a);
    const bool has_b = vertices.contains(e.b);
    add(e);
    if (!has_a && !has_b) {
      for (std::size_t next = idx + 1; next < ranked.size(); ++next) {
        const Edge& cand = ranked[next].first;
        if ((cand.contains(e.a) || cand.contains(e.b)) && !chosen.contains(cand)) {
          add(cand);
          break;
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json edges_to_json(const std::vector<Edge>& edges) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Edge& e : edges) arr.push_back({e.a, e.b});
  return arr;
}

std::vector<Edge> edges_from_json(const nlohmann::json& arr) {
  std::vector<Edge> edges;
  for (const auto& e : arr) {
    if (!e.is_array() || e.size() != 2) throw std::invalid_argument("edge must be a pair");
    edges.push_back({e[0].get<Qubit>(), e[1].get<Qubit>()});
  }
  return edges;
}

}  // namespace

nlohmann::json to_json(const CouplingMap& map) {
  return {{"num_qubits", map.num_qubits()}, {"edges", edges_to_json(map.edges())}};
}

CouplingMap coupling_map_from_json(const nlohmann::json& j) {
  return CouplingMap(j.at("num_qubits").get<std::size_t>(), edges_from_json(j.at("edges")));
}

nlohmann::json to_json(const PatchPlan& plan) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : plan.groups) groups.push_back(g);
  return {{"separation", plan.separation}, {"groups", groups}};
}

PatchPlan patch_plan_from_json(const nlohmann::json& j) {
  PatchPlan plan;
  plan.separation = j.at("separation").get<std::size_t>();
  for (const auto& g : j.at("groups")) plan.groups.push_back(g.get<std::vector<Patch>>());
  return plan;
}

nlohmann::json to_json(const ErrMap& map) {
  return {{"max_edges", map.max_edges}, {"edges", edges_to_json(map.edges)}};
}

ErrMap err_map_from_json(const nlohmann::json& j) {
  ErrMap out;
  out.max_edges = j.at("max_edges").get<std::size_t>();
  out.edges = edges_from_json(j.at("edges"));
  return out;
}

nlohmann::json to_json(const CorrelationWeights& weights) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [e, w] : weights.weights) arr.push_back({{"pair", {e.a, e.b}}, {"weight", w}});
  return {{"locality", weights.locality}, {"weights", arr}};
}

}  // namespace cmc

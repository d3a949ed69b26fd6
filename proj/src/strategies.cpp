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

#include "cmc/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include <Eigen/QR>

namespace cmc {

Method parse_method(std::string_view name) {
  if (name == "bare") return Method::bare;
  if (name == "full") return Method::full;
  if (name == "linear") return Method::linear;
  if (name == "cmc") return Method::cmc;
  if (name == "cmc_err") return Method::cmc_err;
  if (name == "aim") return Method::aim;
  if (name == "sim") return Method::sim;
  if (name == "jigsaw") return Method::jigsaw;
  throw std::invalid_argument("unknown method: " + std::string(name));
}

std::string to_string(Method method) {
  switch (method) {
    case Method::bare: return "bare";
    case Method::full: return "full";
    case Method::linear: return "linear";
    case Method::cmc: return "cmc";
    case Method::cmc_err: return "cmc_err";
    case Method::aim: return "aim";
    case Method::sim: return "sim";
    case Method::jigsaw: return "jigsaw";
  }
  return "unknown";
}

void StrategyConfig::validate() const {
  if (!(calibration_fraction > 0.0 && calibration_fraction < 1.0)) {
    throw std::invalid_argument("calibration_fraction must lie in (0, 1)");
  }
  if (cull_threshold < 0.0) throw std::invalid_argument("cull_threshold must be nonnegative");
  if (locality == 0) throw std::invalid_argument("locality must be positive");
  if (characterisation_shots == 0) {
    throw std::invalid_argument("characterisation_shots must be positive");
  }
  if (aim_top_k == 0) throw std::invalid_argument("aim_top_k must be positive");
  if (jigsaw_rounds == 0) throw std::invalid_argument("jigsaw_rounds must be positive");
  if (jigsaw_epsilon < 0.0) throw std::invalid_argument("jigsaw_epsilon must be nonnegative");
  if (!(jigsaw_global_fraction > 0.0 && jigsaw_global_fraction < 1.0)) {
    throw std::invalid_argument("jigsaw_global_fraction must lie in (0, 1)");
  }
}

nlohmann::json to_json(const StrategyConfig& c) {
  nlohmann::json j = {{"method", to_string(c.method)},
                      {"label", c.name()},
                      {"calibration_fraction", c.calibration_fraction},
                      {"separation", c.separation},
                      {"cull_threshold", c.cull_threshold},
                      {"locality", c.locality},
                      {"max_edges", c.max_edges},
                      {"characterisation_shots", c.characterisation_shots},
                      {"aim_top_k", c.aim_top_k},
                      {"aim_score", c.aim_score == AimScore::max_frequency ? "max_frequency"
                                                                           : "min_entropy"},
                      {"jigsaw_rounds", c.jigsaw_rounds},
                      {"jigsaw_epsilon", c.jigsaw_epsilon},
                      {"jigsaw_global_fraction", c.jigsaw_global_fraction},
                      {"jigsaw_calibrate_pairs", c.jigsaw_calibrate_pairs},
                      {"force_full", c.force_full}};
  if (c.stored_err_map) j["err_map"] = to_json(*c.stored_err_map);
  return j;
}

StrategyConfig strategy_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "method",         "label",         "calibration_fraction",  "separation",
      "cull_threshold", "locality",      "max_edges",             "characterisation_shots",
      "aim_top_k",      "aim_score",     "jigsaw_rounds",         "jigsaw_epsilon",
      "jigsaw_global_fraction",          "jigsaw_calibrate_pairs", "force_full",            "err_map"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("unknown strategy option: " + key);
  }
  StrategyConfig c;
  c.method = parse_method(j.at("method").get<std::string>());
  c.label = j.value("label", "");
  c.calibration_fraction = j.value("calibration_fraction", c.calibration_fraction);
  c.separation = j.value("separation", c.separation);
  c.cull_threshold = j.value("cull_threshold", c.cull_threshold);
  c.locality = j.value("locality", c.locality);
  c.max_edges = j.value("max_edges", c.max_edges);
  c.characterisation_shots = j.value("characterisation_shots", c.characterisation_shots);
  c.aim_top_k = j.value("aim_top_k", c.aim_top_k);
  const std::string score = j.value("aim_score", "max_frequency");
  if (score == "max_frequency") {
    c.aim_score = AimScore::max_frequency;
  } else if (score == "min_entropy") {
    c.aim_score = AimScore::min_entropy;
  } else {
    throw std::invalid_argument("unknown aim_score: " + score);
  }
  c.jigsaw_rounds = j.value("jigsaw_rounds", c.jigsaw_rounds);
  c.jigsaw_epsilon = j.value("jigsaw_epsilon", c.jigsaw_epsilon);
  c.jigsaw_global_fraction = j.value("jigsaw_global_fraction", c.jigsaw_global_fraction);
  c.jigsaw_calibrate_pairs = j.value("jigsaw_calibrate_pairs", c.jigsaw_calibrate_pairs);
  c.force_full = j.value("force_full", c.force_full);
  if (j.contains("err_map")) c.stored_err_map = err_map_from_json(j.at("err_map"));
  c.validate();
  return c;
}

std::uint64_t ShotLedger::get(const std::string& phase) const {
  auto it = phases.find(phase);
  return it == phases.end() ? 0 : it->second;
}

std::uint64_t ShotLedger::total() const {
  std::uint64_t sum = 0;
  for (const auto& [phase, shots] : phases) sum += shots;
  return sum;
}

std::uint64_t ShotBudget::calibration(double fraction) const {
  return static_cast<std::uint64_t>(std::floor(static_cast<double>(total) * fraction));
}

namespace {

constexpr const char* kCalibration = "calibration";
constexpr const char* kCircuit = "circuit";

std::uint64_t per_circuit(std::uint64_t shots, std::size_t circuits, const std::string& what) {
  if (circuits == 0) throw std::invalid_argument("no circuits to share " + what + " shots");
  const std::uint64_t r = shots / circuits;
  if (r == 0) {
    throw std::runtime_error("budget too small: " + std::to_string(shots) + " " + what +
                             " shots for " + std::to_string(circuits) + " circuits");
  }
  return r;
}

void require_budget(const StrategyContext& ctx) {
  if (ctx.budget.total == 0) throw std::invalid_argument("shot budget must be positive");
}

void require_full_measurement(const StrategyContext& ctx, const char* method) {
  if (ctx.circuit.measured_qubits().size() != ctx.circuit.num_qubits) {
    throw std::invalid_argument(std::string(method) + " needs every qubit measured");
  }
}

Circuit with_mask(const Circuit& base, BasisState mask) {
  Circuit c = base;
  c.x_mask(mask);
  return c;
}

Circuit preparation(std::size_t n, BasisState mask) {
  Circuit c;
  c.num_qubits = n;
  c.x_mask(mask);
  return c;
}

MethodResult finish(std::uint64_t shots, MethodResult out) {
  out.ledger.add(kCircuit, shots);
  return out;
}

Distribution average(const std::vector<Distribution>& parts) {
  std::vector<Distribution::Entry> acc;
  const double w = 1.0 / static_cast<double>(parts.size());
  for (const auto& d : parts) {
    for (const auto& [s, p] : d.entries()) acc.emplace_back(s, w * p);
  }
  return make_distribution(parts.front().num_qubits(), acc);
}

}  // namespace

// ---------------------------------------------------------------------------
// Bare, full, linear

MethodResult run_bare(const StrategyContext& ctx, const StrategyConfig&) {
  require_budget(ctx);
  MethodResult out;
  out.mitigated = ctx.backend.execute(ctx.circuit, ctx.budget.total);
  out.circuits = 1;
  return finish(ctx.budget.total, std::move(out));
}

MethodResult run_full(const StrategyContext& ctx, const StrategyConfig& cfg) {
  require_budget(ctx);
  require_full_measurement(ctx, "full calibration");
  const std::size_t n = ctx.circuit.num_qubits;
  if (n > 14 && !cfg.force_full) {
    throw std::invalid_argument("full calibration refused above 14 qubits (set force_full)");
  }
  const std::size_t dim = std::size_t{1} << n;
  const std::uint64_t cal = ctx.budget.calibration(cfg.calibration_fraction);
  const std::uint64_t r = per_circuit(cal, dim, "calibration");

  MethodResult out;
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t col = 0; col < dim; ++col) {
    const Distribution d = ctx.backend.execute(preparation(n, from_dense_index(col, n)), r);
    m.col(static_cast<Eigen::Index>(col)) = to_dense(d);
  }
  out.ledger.add(kCalibration, r * dim);
  out.circuits = dim + 1;

  Matrix inverse;
  Eigen::FullPivLU<Matrix> lu(m);
  if (lu.isInvertible() && std::abs(lu.determinant()) > 1e-300) {
    inverse = lu.inverse();
  } else {
    inverse = Eigen::CompleteOrthogonalDecomposition<Matrix>(m).pseudoInverse();
    out.diagnostics.push_back("full calibration matrix singular; pseudo-inverse used");
  }
  const std::uint64_t shots = ctx.budget.total - cal;
  const Distribution observed = ctx.backend.execute(ctx.circuit, shots);
  out.mitigated = from_dense(inverse * to_dense(observed), n).finalized();
  return finish(shots, std::move(out));
}

MethodResult run_linear(const StrategyContext& ctx, const StrategyConfig& cfg) {
  require_budget(ctx);
  require_full_measurement(ctx, "linear calibration");
  const std::size_t n = ctx.circuit.num_qubits;
  const std::uint64_t cal = ctx.budget.calibration(cfg.calibration_fraction);
  const std::uint64_t r = per_circuit(cal, 2, "calibration");
  const BasisState all = support_mask(ctx.circuit.measured_qubits());
  const Distribution zeros = ctx.backend.execute(preparation(n, 0), r);
  const Distribution ones = ctx.backend.execute(preparation(n, all), r);

  MethodResult out;
  out.ledger.add(kCalibration, 2 * r);
  out.circuits = 3;
  SparseCalibration forward;
  for (Qubit q = 0; q < n; ++q) {
    const BasisState bit = BasisState{1} << q;
    double p1_given0 = 0.0, p1_given1 = 0.0;
    for (const auto& [s, w] : zeros.entries()) {
      if (s & bit) p1_given0 += w;
    }
    for (const auto& [s, w] : ones.entries()) {
      if (s & bit) p1_given1 += w;
    }
    Matrix c(2, 2);
    c << 1.0 - p1_given0, 1.0 - p1_given1, p1_given0, p1_given1;
    forward.factors.push_back({{q}, c});
  }
  const SparseCalibration inverse = invert(forward);
  const std::uint64_t shots = ctx.budget.total - cal;
  out.mitigated = apply(inverse, ctx.backend.execute(ctx.circuit, shots), cfg.cull_threshold);
  return finish(shots, std::move(out));
}

// ---------------------------------------------------------------------------
// CMC

PatchPlan calibration_plan(const CouplingMap& graph, std::size_t k) {
  PatchPlan plan;
  plan.separation = k;
  if (graph.num_edges() > 0) plan = greedy_patch_plan(graph, k);
  std::vector<bool> covered(graph.num_qubits(), false);
  for (const auto& e : graph.edges()) covered[e.a] = covered[e.b] = true;
  std::vector<Patch> singles;
  for (Qubit q = 0; q < graph.num_qubits(); ++q) {
    if (!covered[q]) singles.push_back({q});
  }
  if (!singles.empty()) plan.groups.push_back(std::move(singles));
  return plan;
}

std::size_t calibration_circuit_count(const PatchPlan& plan) {
  std::size_t total = 0;
  for (const auto& group : plan.groups) total += preparation_circuits(group).size();
  return total;
}

PatchCalibration calibrate_patches(Backend& backend, const PatchPlan& plan,
                                   std::uint64_t shots_per_circuit) {
  const std::size_t n = backend.noise().num_qubits;
  PatchCalibration out;
  out.plan = plan;
  for (const auto& group : plan.groups) {
    // Column accumulators per patch, weighted by shots.
    std::vector<Matrix> acc;
    std::vector<std::vector<double>> weight;
    for (const Patch& p : group) {
      const Eigen::Index dim = Eigen::Index{1} << p.size();
      acc.push_back(Matrix::Zero(dim, dim));
      weight.emplace_back(static_cast<std::size_t>(dim), 0.0);
    }
    std::vector<std::map<std::size_t, CountsRecord>> records(group.size());
    for (const PreparationSpec& prep : preparation_circuits(group)) {
      const Distribution d = backend.execute(preparation(n, prep.x_mask), shots_per_circuit);
      ++out.circuits;
      out.shots += shots_per_circuit;
      for (std::size_t i = 0; i < group.size(); ++i) {
        const Patch& p = group[i];
        const std::size_t col = gather_bits(prep.x_mask, p);
        CountsRecord& rec = records[i][col];
        rec.support = p;
        rec.prepared = col;
        for (const auto& [s, w] : d.entries()) {
          const std::size_t row = gather_bits(s, p);
          acc[i](static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) += w;
          rec.counts[row] += static_cast<std::uint64_t>(
              std::llround(w * static_cast<double>(shots_per_circuit)));
        }
        weight[i][col] += 1.0;
      }
    }
    for (std::size_t i = 0; i < group.size(); ++i) {
      Matrix m = acc[i];
      for (Eigen::Index c = 0; c < m.cols(); ++c) m.col(c) /= weight[i][static_cast<std::size_t>(c)];
      out.matrices.emplace_back(group[i], normalize_columns(m));
      for (auto& [col, rec] : records[i]) {
        std::erase_if(rec.counts, [](const auto& e) { return e.second == 0; });
        rec.shots = 0;
        for (const auto& [row, c] : rec.counts) rec.shots += c;
        out.records.push_back(std::move(rec));
      }
    }
  }
  return out;
}

namespace {

MethodResult cmc_on_graph(const StrategyContext& ctx, const StrategyConfig& cfg,
                          const CouplingMap& graph, MethodResult out) {
  const PatchPlan plan = calibration_plan(graph, cfg.separation);
  const std::uint64_t cal = ctx.budget.calibration(cfg.calibration_fraction);
  const std::size_t count = calibration_circuit_count(plan);
  const std::uint64_t r = per_circuit(cal, count, "calibration");
  const PatchCalibration pc = calibrate_patches(ctx.backend, plan, r);
  out.ledger.add(kCalibration, pc.shots);
  out.circuits += pc.circuits + 1;
  out.diagnostics.push_back("patch groups: " + std::to_string(plan.num_groups()) +
                            ", calibration circuits: " + std::to_string(pc.circuits));

  const JoinPlan join_plan = make_join_plan(pc.matrices);
  const AssembledCalibration assembled =
      assemble_for_measured(join_plan, ctx.circuit.measured_qubits());
  for (Qubit q : assembled.uncovered) {
    out.diagnostics.push_back("measured qubit " + std::to_string(q) + " has no calibration");
  }
  const SparseCalibration inverse = invert(assembled.calibration);
  const std::uint64_t shots = ctx.budget.total - cal;
  out.mitigated = apply(inverse, ctx.backend.execute(ctx.circuit, shots), cfg.cull_threshold);
  return finish(shots, std::move(out));
}

}  // namespace

MethodResult run_cmc(const StrategyContext& ctx, const StrategyConfig& cfg) {
  require_budget(ctx);
  if (ctx.map.num_qubits() != ctx.circuit.num_qubits) {
    throw std::invalid_argument("coupling map and circuit disagree on register size");
  }
  return cmc_on_graph(ctx, cfg, ctx.map, {});
}

CorrelationWeights measure_correlation_weights(Backend& backend, const CouplingMap& map,
                                               std::size_t locality,
                                               std::uint64_t shots_per_circuit) {
  const std::size_t n = map.num_qubits();
  auto isolated = [&](const std::vector<Qubit>& support) {
    const Eigen::Index dim = Eigen::Index{1} << support.size();
    Matrix m = Matrix::Zero(dim, dim);
    for (const PreparationSpec& prep : preparation_circuits(support)) {
      Circuit c = preparation(n, prep.x_mask);
      c.measured = support;
      const Distribution d = backend.execute(c, shots_per_circuit);
      for (const auto& [s, w] : d.entries()) {
        m(static_cast<Eigen::Index>(gather_bits(s, support)),
          static_cast<Eigen::Index>(prep.basis_index)) += w;
      }
    }
    return CalibrationMatrix(support, normalize_columns(m));
  };
  std::map<Qubit, CalibrationMatrix> singles;
  for (Qubit q = 0; q < n; ++q) singles.emplace(q, isolated({q}));
  std::map<Edge, CalibrationMatrix> pairs;
  for (const Edge& e : candidate_pairs(map, locality)) pairs.emplace(e, isolated({e.a, e.b}));
  return correlation_weights(singles, pairs, locality);
}

MethodResult run_cmc_err(const StrategyContext& ctx, const StrategyConfig& cfg) {
  require_budget(ctx);
  const std::size_t n = ctx.circuit.num_qubits;
  if (ctx.map.num_qubits() != n) {
    throw std::invalid_argument("coupling map and circuit disagree on register size");
  }
  MethodResult out;
  ErrMap em;
  if (cfg.stored_err_map) {
    em = *cfg.stored_err_map;
  } else {
    const std::size_t before = ctx.backend.circuits_run();
    const std::uint64_t shots_before = ctx.backend.shots_run();
    const CorrelationWeights w =
        measure_correlation_weights(ctx.backend, ctx.map, cfg.locality, cfg.characterisation_shots);
    em = err_map(w, cfg.max_edges == 0 ? n : cfg.max_edges);
    out.amortized_shots = ctx.backend.shots_run() - shots_before;
    out.diagnostics.push_back("weight pre-pass: " +
                              std::to_string(ctx.backend.circuits_run() - before) +
                              " circuits, " + std::to_string(out.amortized_shots) +
                              " shots (amortised)");
  }
  std::string edges;
  for (const Edge& e : em.edges) {
    edges += (edges.empty() ? "" : " ") + std::to_string(e.a) + "-" + std::to_string(e.b);
  }
  out.diagnostics.push_back("error map: " + edges);
  return cmc_on_graph(ctx, cfg, em.as_coupling_map(n), std::move(out));
}

// ---------------------------------------------------------------------------
// SIM and AIM

MethodResult run_sim(const StrategyContext& ctx, const StrategyConfig&) {
  require_budget(ctx);
  const std::size_t n = ctx.circuit.num_qubits;
  BasisState odd = 0, even = 0;
  for (Qubit q = 0; q < n; ++q) (q % 2 ? odd : even) |= BasisState{1} << q;
  const BasisState all = odd | even;
  const BasisState masks[] = {0, all, odd, even};
  const std::uint64_t r = per_circuit(ctx.budget.total, 4, "circuit");
  const BasisState measured = support_mask(ctx.circuit.measured_qubits());

  MethodResult out;
  std::vector<Distribution> parts;
  for (BasisState mask : masks) {
    const Distribution d = ctx.backend.execute(with_mask(ctx.circuit, mask), r);
    parts.push_back(d.xored(mask & measured));
  }
  out.mitigated = average(parts).finalized();
  out.circuits = 4;
  return finish(4 * r, std::move(out));
}

MethodResult run_aim(const StrategyContext& ctx, const StrategyConfig& cfg) {
  require_budget(ctx);
  const std::size_t n = ctx.circuit.num_qubits;
  std::vector<BasisState> candidates;
  if (n < 4) {
    candidates.push_back((BasisState{1} << n) - 1);
  } else {
    for (std::size_t start = 0; start + 4 <= n; start += 2) {
      candidates.push_back(BasisState{0xF} << start);
    }
  }
  const std::size_t top_k = std::min(cfg.aim_top_k, candidates.size());
  const std::uint64_t phase1 = ctx.budget.calibration(cfg.calibration_fraction);
  const std::uint64_t r1 = per_circuit(phase1, candidates.size(), "first-phase");
  const std::uint64_t r2 = per_circuit(ctx.budget.total - phase1, top_k, "second-phase");
  const BasisState measured = support_mask(ctx.circuit.measured_qubits());

  MethodResult out;
  std::vector<std::pair<double, std::size_t>> scores;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Distribution d = ctx.backend.execute(with_mask(ctx.circuit, candidates[i]), r1);
    double score = 0.0;
    if (cfg.aim_score == AimScore::max_frequency) {
      for (const auto& [s, p] : d.entries()) score = std::max(score, p);
    } else {
      for (const auto& [s, p] : d.entries()) {
        if (p > 0.0) score += p * std::log(p);  // negative entropy
      }
    }
    scores.emplace_back(score, i);
  }
  std::stable_sort(scores.begin(), scores.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  out.ledger.add(kCalibration, r1 * candidates.size());

  std::vector<Distribution> parts;
  for (std::size_t rank = 0; rank < top_k; ++rank) {
    const BasisState mask = candidates[scores[rank].second];
    const Distribution d = ctx.backend.execute(with_mask(ctx.circuit, mask), r2);
    parts.push_back(d.xored(mask & measured));
  }
  out.mitigated = average(parts).finalized();
  out.circuits = candidates.size() + top_k;
  return finish(r2 * top_k, std::move(out));
}

// ---------------------------------------------------------------------------
// JIGSAW

bool jigsaw_update(std::vector<Distribution::Entry>& table, const std::vector<Qubit>& pair,
                   const std::vector<double>& sub, double epsilon) {
  const std::size_t dim = std::size_t{1} << pair.size();
  if (sub.size() != dim) throw std::invalid_argument("sub-table size does not match the patch");
  std::vector<double> mass(dim, 0.0);
  for (const auto& [s, w] : table) mass[gather_bits(s, pair)] += w;

  std::vector<bool> active(dim, false);
  double resident = 0.0, evidence = 0.0;
  for (std::size_t x = 0; x < dim; ++x) {
    const bool frozen = mass[x] > 0.0 && mass[x] < epsilon;
    active[x] = !frozen;
    if (active[x]) {
      resident += mass[x];
      evidence += sub[x];
    }
  }
  if (evidence <= 0.0) return false;

  // Subsets with no resident mass cannot be scaled; their evidence is dropped.
  double reachable = 0.0;
  for (std::size_t x = 0; x < dim; ++x) {
    if (active[x] && mass[x] > 0.0) reachable += sub[x];
  }
  if (reachable <= 0.0) return false;

  std::vector<double> scale(dim, 1.0);
  for (std::size_t x = 0; x < dim; ++x) {
    if (active[x] && mass[x] > 0.0) scale[x] = resident * (sub[x] / reachable) / mass[x];
  }
  for (auto& [s, w] : table) w *= scale[gather_bits(s, pair)];
  std::erase_if(table, [](const auto& e) { return e.second == 0.0; });
  return true;
}

MethodResult run_jigsaw(const StrategyContext& ctx, const StrategyConfig& cfg) {
  require_budget(ctx);
  const std::size_t n = ctx.circuit.num_qubits;
  std::vector<Qubit> measured = ctx.circuit.measured_qubits();
  if (measured.size() < 2) return run_bare(ctx, cfg);
  const std::size_t pairs_per_round = measured.size() / 2;
  const std::size_t rounds = cfg.jigsaw_rounds;

  // One global circuit per round; their counts are pooled into one table.
  const std::uint64_t global =
      static_cast<std::uint64_t>(std::floor(static_cast<double>(ctx.budget.total) *
                                            cfg.jigsaw_global_fraction));
  if (global < rounds) throw std::runtime_error("budget too small for the global table");
  const std::size_t calibration_circuits = cfg.jigsaw_calibrate_pairs ? 4 : 0;
  const std::size_t round_circuits = rounds * (pairs_per_round + calibration_circuits);
  const std::uint64_t r = per_circuit(ctx.budget.total - global, round_circuits, "subset");

  MethodResult out;
  std::vector<Distribution::Entry> pooled;
  for (std::size_t round = 0; round < rounds; ++round) {
    const std::uint64_t shots = global / rounds + (round == 0 ? global % rounds : 0);
    const double w = static_cast<double>(shots) / static_cast<double>(global);
    const Distribution part = ctx.backend.execute(ctx.circuit, shots);
    for (const auto& [s, p] : part.entries()) pooled.emplace_back(s, w * p);
  }
  std::vector<Distribution::Entry> table = make_distribution(n, pooled).entries();
  Rng rng(mix_seed(ctx.seed));

  for (std::size_t round = 0; round < rounds; ++round) {
    std::vector<Qubit> order = measured;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Patch> pairs;
    std::vector<Qubit> paired;
    for (std::size_t i = 0; i + 1 < order.size(); i += 2) {
      pairs.push_back({std::min(order[i], order[i + 1]), std::max(order[i], order[i + 1])});
      paired.push_back(order[i]);
      paired.push_back(order[i + 1]);
    }

    // Simultaneous pair calibration over the qubits of this round.
    std::vector<Matrix> cal(pairs.size(), Matrix::Identity(4, 4));
    if (cfg.jigsaw_calibrate_pairs) {
      for (Matrix& m : cal) m.setZero();
      for (const PreparationSpec& prep : preparation_circuits(pairs)) {
        Circuit c = preparation(n, prep.x_mask);
        c.measured = paired;
        const Distribution d = ctx.backend.execute(c, r);
        for (std::size_t i = 0; i < pairs.size(); ++i) {
          const auto col = static_cast<Eigen::Index>(gather_bits(prep.x_mask, pairs[i]));
          for (const auto& [s, w] : d.entries()) {
            cal[i](static_cast<Eigen::Index>(gather_bits(s, pairs[i])), col) += w;
          }
        }
      }
      out.ledger.add(kCalibration, 4 * r);
    }

    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const std::string name = std::to_string(pairs[i][0]) + "-" + std::to_string(pairs[i][1]);
      Circuit c = ctx.circuit;
      c.measured = pairs[i];
      const Distribution d = ctx.backend.execute(c, r);
      out.ledger.add(kCircuit, r);
      Eigen::Vector4d raw = Eigen::Vector4d::Zero();
      for (const auto& [s, w] : d.entries()) raw(static_cast<Eigen::Index>(gather_bits(s, pairs[i]))) += w;
      Eigen::Vector4d fixed = raw;
      if (cfg.jigsaw_calibrate_pairs) {
        Eigen::FullPivLU<Matrix> lu(cal[i]);
        if (lu.isInvertible()) {
          fixed = lu.solve(Matrix(raw));
        } else {
          out.diagnostics.push_back("singular pair calibration on " + name + "; raw sub-table used");
        }
      }
      std::vector<double> sub(4);
      double sum = 0.0;
      for (int x = 0; x < 4; ++x) sum += (sub[static_cast<std::size_t>(x)] = std::max(fixed(x), 0.0));
      if (sum <= 0.0) {
        out.diagnostics.push_back("empty sub-table on " + name);
        continue;
      }
      for (double& v : sub) v /= sum;
      if (std::count_if(sub.begin(), sub.end(), [](double v) { return v > 0.0; }) == 1) {
        out.diagnostics.push_back("singleton sub-table on " + name);
      }
      if (!jigsaw_update(table, pairs[i], sub, cfg.jigsaw_epsilon)) {
        out.diagnostics.push_back("sub-table on " + name +
                                  " has no weight on active subsets; table kept");
      }
    }
  }
  out.mitigated = Distribution(n, std::move(table)).finalized();
  out.circuits = rounds + round_circuits;
  return finish(global, std::move(out));
}

MethodResult run_strategy(const StrategyContext& ctx, const StrategyConfig& cfg) {
  cfg.validate();
  switch (cfg.method) {
    case Method::bare: return run_bare(ctx, cfg);
    case Method::full: return run_full(ctx, cfg);
    case Method::linear: return run_linear(ctx, cfg);
    case Method::cmc: return run_cmc(ctx, cfg);
    case Method::cmc_err: return run_cmc_err(ctx, cfg);
    case Method::aim: return run_aim(ctx, cfg);
    case Method::sim: return run_sim(ctx, cfg);
    case Method::jigsaw: return run_jigsaw(ctx, cfg);
  }
  throw std::invalid_argument("unknown method");
}

}  // namespace cmc

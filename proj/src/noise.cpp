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

#include "cmc/noise.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

namespace cmc {

namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
  }
}

}  // namespace

MeasurementChannel state_dependent_channel(Qubit q, double p01, double p10) {
  check_probability(p01, "p01");
  check_probability(p10, "p10");
  Matrix m(2, 2);
  m << 1.0 - p01, p10, p01, 1.0 - p10;
  return MeasurementChannel({q}, m);
}

CorrelatedKind parse_correlated_kind(std::string_view name) {
  if (name == "pairwise_flip") return CorrelatedKind::pairwise_flip;
  if (name == "triplet_flip") return CorrelatedKind::triplet_flip;
  if (name == "flip_all") return CorrelatedKind::flip_all;
  if (name == "joint_decay") return CorrelatedKind::joint_decay;
  throw std::invalid_argument("unknown correlated channel kind: " + std::string(name));
}

std::string to_string(CorrelatedKind kind) {
  switch (kind) {
    case CorrelatedKind::pairwise_flip: return "pairwise_flip";
    case CorrelatedKind::triplet_flip: return "triplet_flip";
    case CorrelatedKind::flip_all: return "flip_all";
    case CorrelatedKind::joint_decay: return "joint_decay";
  }
  return "unknown";
}

MeasurementChannel correlated_channel(const std::vector<Qubit>& support, CorrelatedKind kind,
                                      double p) {
  check_probability(p, "correlated error probability");
  validate_support(support);
  const std::size_t k = support.size();
  if ((kind == CorrelatedKind::pairwise_flip && k != 2) ||
      (kind == CorrelatedKind::triplet_flip && k != 3)) {
    throw std::invalid_argument(to_string(kind) + " does not act on " + std::to_string(k) +
                                " qubits");
  }
  const Eigen::Index dim = Eigen::Index{1} << k;
  Matrix m = (1.0 - p) * Matrix::Identity(dim, dim);
  if (kind == CorrelatedKind::joint_decay) {
    for (Eigen::Index c = 0; c < dim - 1; ++c) m(c, c) = 1.0;
    m(0, dim - 1) += p;
  } else {
    for (Eigen::Index c = 0; c < dim; ++c) m(dim - 1 - c, c) += p;
  }
  return MeasurementChannel(support, m);
}

Matrix compose(const std::vector<MeasurementChannel>& channels, std::size_t num_qubits) {
  SparseCalibration sc;
  for (const auto& ch : channels) sc.factors.push_back({ch.support(), ch.entries()});
  return dense_matrix(sc, num_qubits);
}

// ---------------------------------------------------------------------------
// NoiseSpec

NoiseSpec NoiseSpec::noiseless(std::size_t num_qubits) {
  NoiseSpec spec;
  spec.num_qubits = num_qubits;
  spec.per_qubit.assign(num_qubits, {});
  return spec;
}

void NoiseSpec::validate() const {
  if (num_qubits == 0 || num_qubits > kMaxRegisterSize) {
    throw std::invalid_argument("noise register size must be in 1..64");
  }
  if (per_qubit.size() != num_qubits) {
    throw std::invalid_argument("per-qubit rates do not match the register size");
  }
  for (const auto& r : per_qubit) {
    check_probability(r.p01, "p01");
    check_probability(r.p10, "p10");
  }
  for (const auto& ch : correlated) {
    if (ch.support().back() >= num_qubits) {
      throw std::invalid_argument("correlated channel support outside the register");
    }
  }
  check_probability(gate_flip, "gate_flip");
}

SparseCalibration NoiseSpec::channel_for(const std::vector<Qubit>& measured) const {
  const std::set<Qubit> meas(measured.begin(), measured.end());
  SparseCalibration sc;
  for (Qubit q : meas) {
    const ReadoutRates& r = per_qubit.at(q);
    if (r.p01 == 0.0 && r.p10 == 0.0) continue;
    sc.factors.push_back({{q}, state_dependent_channel(q, r.p01, r.p10).entries()});
  }
  for (const auto& ch : correlated) {
    const bool whole = std::all_of(ch.support().begin(), ch.support().end(),
                                   [&](Qubit q) { return meas.contains(q); });
    if (whole) sc.factors.push_back({ch.support(), ch.entries()});
  }
  return sc;
}

NoiseSpec random_readout_noise(std::size_t num_qubits, double low, double high,
                               std::uint64_t seed) {
  check_probability(low, "low rate");
  check_probability(high, "high rate");
  if (low > high) throw std::invalid_argument("low rate above high rate");
  NoiseSpec spec = NoiseSpec::noiseless(num_qubits);
  Rng rng(seed);
  for (auto& r : spec.per_qubit) {
    r.p01 = low + (high - low) * uniform01(rng);
    r.p10 = low + (high - low) * uniform01(rng);
  }
  return spec;
}

nlohmann::json to_json(const NoiseSpec& spec) {
  nlohmann::json rates = nlohmann::json::array();
  for (const auto& r : spec.per_qubit) rates.push_back({{"p01", r.p01}, {"p10", r.p10}});
  nlohmann::json correlated = nlohmann::json::array();
  for (const auto& ch : spec.correlated) correlated.push_back(to_json(ch));
  return {{"num_qubits", spec.num_qubits},
          {"per_qubit", rates},
          {"correlated", correlated},
          {"gate_flip", spec.gate_flip}};
}

NoiseSpec noise_spec_from_json(const nlohmann::json& j) {
  NoiseSpec spec = NoiseSpec::noiseless(j.at("num_qubits").get<std::size_t>());
  if (j.contains("per_qubit")) {
    const auto& rates = j.at("per_qubit");
    if (rates.size() != spec.num_qubits) {
      throw std::invalid_argument("per_qubit must list every qubit");
    }
    for (std::size_t q = 0; q < spec.num_qubits; ++q) {
      spec.per_qubit[q] = {rates[q].value("p01", 0.0), rates[q].value("p10", 0.0)};
    }
  }
  for (const auto& ch : j.value("correlated", nlohmann::json::array())) {
    if (ch.contains("kind")) {
      spec.correlated.push_back(correlated_channel(ch.at("support").get<std::vector<Qubit>>(),
                                                   parse_correlated_kind(ch.at("kind").get<std::string>()),
                                                   ch.at("p").get<double>()));
    } else {
      spec.correlated.push_back(calibration_matrix_from_json(ch));
    }
  }
  spec.gate_flip = j.value("gate_flip", 0.0);
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// Circuits

std::vector<Qubit> Circuit::measured_qubits() const {
  if (!measured.empty()) {
    std::vector<Qubit> out(measured);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  std::vector<Qubit> out(num_qubits);
  for (Qubit q = 0; q < num_qubits; ++q) out[q] = q;
  return out;
}

Circuit& Circuit::h(Qubit q) {
  gates.push_back({Gate::Kind::h, q, 0});
  return *this;
}

Circuit& Circuit::x(Qubit q) {
  gates.push_back({Gate::Kind::x, q, 0});
  return *this;
}

Circuit& Circuit::cnot(Qubit control, Qubit target) {
  gates.push_back({Gate::Kind::cnot, target, control});
  return *this;
}

Circuit& Circuit::x_mask(BasisState mask) {
  for (Qubit q = 0; q < num_qubits; ++q) {
    if ((mask >> q) & 1U) x(q);
  }
  return *this;
}

void Circuit::validate() const {
  if (num_qubits == 0 || num_qubits > kMaxRegisterSize) {
    throw std::invalid_argument("circuit register size must be in 1..64");
  }
  std::vector<bool> touched(num_qubits, false);
  for (const Gate& g : gates) {
    if (g.target >= num_qubits || (g.kind == Gate::Kind::cnot && g.control >= num_qubits)) {
      throw std::invalid_argument("gate acts outside the register");
    }
    if (g.kind == Gate::Kind::h && touched[g.target]) {
      throw std::invalid_argument("H is only supported on an untouched qubit");
    }
    if (g.kind == Gate::Kind::cnot) {
      if (g.control == g.target) throw std::invalid_argument("CNOT control equals target");
      touched[g.control] = true;
    }
    touched[g.target] = true;
  }
  for (Qubit q : measured) {
    if (q >= num_qubits) throw std::invalid_argument("measured qubit outside the register");
  }
}

namespace {

using StateMap = std::map<BasisState, double>;

void flip_mix(StateMap& dist, Qubit q, double g) {
  if (g == 0.0) return;
  StateMap out;
  for (const auto& [s, w] : dist) {
    out[s] += (1.0 - g) * w;
    out[s ^ (BasisState{1} << q)] += g * w;
  }
  dist.swap(out);
}

// Pre-measurement distribution with gate noise.
StateMap propagate(const Circuit& c, double gate_flip) {
  StateMap dist{{0, 1.0}};
  for (const Gate& g : c.gates) {
    const BasisState t = BasisState{1} << g.target;
    StateMap out;
    for (const auto& [s, w] : dist) {
      switch (g.kind) {
        case Gate::Kind::h:
          out[s & ~t] += 0.5 * w;
          out[s | t] += 0.5 * w;
          break;
        case Gate::Kind::x:
          out[s ^ t] += w;
          break;
        case Gate::Kind::cnot:
          out[((s >> g.control) & 1U) ? s ^ t : s] += w;
          break;
      }
    }
    dist.swap(out);
    flip_mix(dist, g.target, gate_flip);
    if (g.kind == Gate::Kind::cnot) flip_mix(dist, g.control, gate_flip);
  }
  return dist;
}

Distribution measured_marginal(const StateMap& dist, const Circuit& c) {
  const auto meas = c.measured_qubits();
  const BasisState mask = support_mask(meas);
  std::vector<Distribution::Entry> entries;
  for (const auto& [s, w] : dist) entries.emplace_back(s & mask, w);
  return make_distribution(c.num_qubits, entries);
}

// Cumulative column tables for sampling a channel factor.
struct FactorSampler {
  std::vector<Qubit> support;
  BasisState mask = 0;
  std::vector<std::vector<double>> cumulative;  // per column

  explicit FactorSampler(const Factor& f) : support(f.support), mask(support_mask(f.support)) {
    const auto dim = static_cast<std::size_t>(f.matrix.rows());
    cumulative.assign(dim, std::vector<double>(dim));
    for (std::size_t c = 0; c < dim; ++c) {
      double acc = 0.0;
      for (std::size_t r = 0; r < dim; ++r) {
        acc += f.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        cumulative[c][r] = acc;
      }
    }
  }

  BasisState draw(BasisState s, Rng& rng) const {
    const auto& cum = cumulative[gather_bits(s, support)];
    const double u = uniform01(rng) * cum.back();
    std::size_t row = 0;
    while (row + 1 < cum.size() && u >= cum[row]) ++row;
    return (s & ~mask) | scatter_bits(row, support);
  }
};

std::vector<FactorSampler> samplers_for(const SparseCalibration& channel) {
  std::vector<FactorSampler> out;
  for (const Factor& f : channel.factors) out.emplace_back(f);
  return out;
}

}  // namespace

Distribution ideal_distribution(const Circuit& circuit) {
  circuit.validate();
  return measured_marginal(propagate(circuit, 0.0), circuit);
}

Distribution ideal_ghz(std::size_t num_qubits) {
  if (num_qubits == 0 || num_qubits > kMaxRegisterSize) {
    throw std::invalid_argument("GHZ register size must be in 1..64");
  }
  const BasisState ones =
      num_qubits == 64 ? ~BasisState{0} : (BasisState{1} << num_qubits) - 1;
  return Distribution(num_qubits, {{0, 0.5}, {ones, 0.5}});
}

std::vector<std::pair<Qubit, Qubit>> ghz_cnot_schedule(const CouplingMap& map, Qubit root) {
  if (root >= map.num_qubits()) throw std::out_of_range("GHZ root outside coupling map");
  std::vector<std::pair<Qubit, Qubit>> out;
  std::vector<bool> seen(map.num_qubits(), false);
  std::deque<Qubit> queue{root};
  seen[root] = true;
  while (!queue.empty()) {
    const Qubit u = queue.front();
    queue.pop_front();
    for (Qubit w : map.neighbors(u)) {
      if (!seen[w]) {
        seen[w] = true;
        out.emplace_back(u, w);
        queue.push_back(w);
      }
    }
  }
  if (out.size() + 1 != map.num_qubits()) {
    throw std::invalid_argument("coupling map is not connected from the GHZ root");
  }
  return out;
}

Circuit ghz_circuit(const CouplingMap& map, Qubit root) {
  Circuit c;
  c.num_qubits = map.num_qubits();
  c.h(root);
  for (const auto& [control, target] : ghz_cnot_schedule(map, root)) c.cnot(control, target);
  return c;
}

// ---------------------------------------------------------------------------
// Backend

Backend::Backend(NoiseSpec noise, std::uint64_t seed, bool exact)
    : noise_(std::move(noise)), rng_(seed), exact_(exact) {
  noise_.validate();
}

Counts Backend::sample(const Circuit& circuit, std::uint64_t shots) {
  circuit.validate();
  if (circuit.num_qubits != noise_.num_qubits) {
    throw std::invalid_argument("circuit and noise model disagree on register size");
  }
  if (shots == 0) throw std::invalid_argument("shot count must be positive");
  const auto meas = circuit.measured_qubits();
  const BasisState keep = support_mask(meas);
  const auto samplers = samplers_for(noise_.channel_for(meas));
  const double g = noise_.gate_flip;
  Counts counts;
  for (std::uint64_t shot = 0; shot < shots; ++shot) {
    BasisState s = 0;
    for (const Gate& gate : circuit.gates) {
      const BasisState t = BasisState{1} << gate.target;
      switch (gate.kind) {
        case Gate::Kind::h:
          if (uniform01(rng_) < 0.5) s |= t;
          break;
        case Gate::Kind::x:
          s ^= t;
          break;
        case Gate::Kind::cnot:
          if ((s >> gate.control) & 1U) s ^= t;
          break;
      }
      if (g > 0.0) {
        if (uniform01(rng_) < g) s ^= t;
        if (gate.kind == Gate::Kind::cnot && uniform01(rng_) < g) {
          s ^= BasisState{1} << gate.control;
        }
      }
    }
    s &= keep;
    for (const auto& sampler : samplers) s = sampler.draw(s, rng_);
    ++counts[s & keep];
  }
  ++circuits_;
  shots_ += shots;
  return counts;
}

Distribution Backend::exact_distribution(const Circuit& circuit) {
  circuit.validate();
  if (circuit.num_qubits != noise_.num_qubits) {
    throw std::invalid_argument("circuit and noise model disagree on register size");
  }
  const Distribution before = measured_marginal(propagate(circuit, noise_.gate_flip), circuit);
  return apply_raw(noise_.channel_for(circuit.measured_qubits()), before, 0.0);
}

Distribution Backend::execute(const Circuit& circuit, std::uint64_t shots) {
  if (exact_) {
    if (shots == 0) throw std::invalid_argument("shot count must be positive");
    Distribution d = exact_distribution(circuit);
    ++circuits_;
    shots_ += shots;
    return d;
  }
  return Distribution::from_counts(circuit.num_qubits, sample(circuit, shots));
}

Counts simulate_counts(const Distribution& ideal, const SparseCalibration& channel,
                       std::uint64_t shots, std::uint64_t seed) {
  if (shots == 0) throw std::invalid_argument("shot count must be positive");
  if (ideal.empty()) throw std::invalid_argument("ideal distribution is empty");
  for (const Factor& f : channel.factors) {
    if (f.support.back() >= ideal.num_qubits()) {
      throw std::invalid_argument("channel acts outside the ideal register");
    }
  }
  std::vector<double> cum;
  double acc = 0.0;
  for (const auto& [s, w] : ideal.entries()) {
    acc += std::max(w, 0.0);
    cum.push_back(acc);
  }
  const auto samplers = samplers_for(channel);
  Rng rng(seed);
  Counts counts;
  for (std::uint64_t shot = 0; shot < shots; ++shot) {
    const double u = uniform01(rng) * acc;
    auto idx = static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    idx = std::min(idx, cum.size() - 1);
    BasisState s = ideal.entries()[idx].first;
    for (const auto& sampler : samplers) s = sampler.draw(s, rng);
    ++counts[s];
  }
  return counts;
}

std::vector<XChainPoint> x_chain_experiment(std::size_t depth_max, ReadoutRates rates,
                                            double gate_flip, std::uint64_t shots,
                                            std::uint64_t seed) {
  if (depth_max == 0) throw std::invalid_argument("depth_max must be at least 1");
  NoiseSpec spec = NoiseSpec::noiseless(1);
  spec.per_qubit[0] = rates;
  spec.gate_flip = gate_flip;
  Backend backend(spec, seed);
  std::vector<XChainPoint> out;
  Circuit c;
  c.num_qubits = 1;
  for (std::size_t d = 1; d <= depth_max; ++d) {
    c.x(0);
    const int ideal = static_cast<int>(d % 2);
    const Counts counts = backend.sample(c, shots);
    const auto wrong = counts.contains(ideal ? 0 : 1) ? counts.at(ideal ? 0 : 1) : 0;
    const double q = 0.5 * (1.0 - std::pow(1.0 - 2.0 * gate_flip, static_cast<double>(d)));
    const double expected = ideal ? (1.0 - q) * rates.p10 + q * (1.0 - rates.p01)
                                  : (1.0 - q) * rates.p01 + q * (1.0 - rates.p10);
    out.push_back({d, ideal, static_cast<double>(wrong) / static_cast<double>(shots), expected});
  }
  return out;
}

}  // namespace cmc

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

#include "cmc/calibration.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace cmc {

std::vector<PreparationSpec> preparation_circuits(const Patch& support) {
  return preparation_circuits(std::vector<Patch>{support});
}

std::vector<PreparationSpec> preparation_circuits(const std::vector<Patch>& group) {
  if (group.empty()) throw std::invalid_argument("empty patch group");
  std::size_t widest = 0;
  BasisState seen = 0;
  for (const Patch& patch : group) {
    validate_support(patch);
    const BasisState mask = support_mask(patch);
    if (seen & mask) throw std::invalid_argument("patches in a group overlap");
    seen |= mask;
    widest = std::max(widest, patch.size());
  }
  std::vector<PreparationSpec> out;
  const std::size_t count = std::size_t{1} << widest;
  for (std::size_t b = 0; b < count; ++b) {
    PreparationSpec spec{b, 0};
    for (const Patch& patch : group) {
      const std::size_t local = b & ((std::size_t{1} << patch.size()) - 1);
      spec.x_mask |= scatter_bits(local, patch);
    }
    out.push_back(spec);
  }
  return out;
}

std::string local_bitstring(std::size_t local, std::size_t width) {
  std::string out(width, '0');
  for (std::size_t i = 0; i < width; ++i) {
    if ((local >> (width - 1 - i)) & 1U) out[i] = '1';
  }
  return out;
}

std::size_t parse_local_bitstring(std::string_view bits, std::size_t width) {
  if (bits.size() != width) throw std::invalid_argument("bitstring width does not match support");
  std::size_t local = 0;
  for (char ch : bits) {
    if (ch != '0' && ch != '1') throw std::invalid_argument("bitstring must contain only 0/1");
    local = (local << 1) | static_cast<std::size_t>(ch == '1');
  }
  return local;
}

nlohmann::json to_json(const CountsRecord& record) {
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [outcome, c] : record.counts) {
    counts[local_bitstring(outcome, record.support.size())] = c;
  }
  return {{"support", record.support},
          {"prepared", local_bitstring(record.prepared, record.support.size())},
          {"counts", counts},
          {"shots", record.shots},
          {"device", record.device},
          {"timestamp", record.timestamp}};
}

CountsRecord counts_record_from_json(const nlohmann::json& j) {
  CountsRecord r;
  r.support = j.at("support").get<std::vector<Qubit>>();
  validate_support(r.support);
  const std::size_t width = r.support.size();
  r.prepared = parse_local_bitstring(j.at("prepared").get<std::string>(), width);
  std::uint64_t sum = 0;
  for (const auto& [bits, c] : j.at("counts").items()) {
    const auto value = c.get<std::uint64_t>();
    r.counts[parse_local_bitstring(bits, width)] += value;
    sum += value;
  }
  r.shots = j.at("shots").get<std::uint64_t>();
  if (sum != r.shots) throw std::invalid_argument("counts do not sum to the shot count");
  r.device = j.value("device", "");
  r.timestamp = j.value("timestamp", "");
  return r;
}

CalibrationMatrix estimate_matrix(const std::vector<CountsRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no calibration records");
  const std::vector<Qubit>& support = records.front().support;
  validate_support(support);
  const std::size_t dim = std::size_t{1} << support.size();
  std::vector<std::map<std::size_t, std::uint64_t>> columns(dim);
  std::vector<std::uint64_t> shots(dim, 0);
  for (const CountsRecord& r : records) {
    if (r.support != support) throw std::invalid_argument("records disagree on support");
    if (r.prepared >= dim) throw std::invalid_argument("prepared state outside support");
    for (const auto& [outcome, c] : r.counts) {
      if (outcome >= dim) throw std::invalid_argument("observed state outside support");
      columns[r.prepared][outcome] += c;
      shots[r.prepared] += c;
    }
  }
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t col = 0; col < dim; ++col) {
    if (shots[col] == 0) {
      throw std::invalid_argument("no shots for prepared state " +
                                  local_bitstring(col, support.size()));
    }
    for (const auto& [outcome, c] : columns[col]) {
      m(static_cast<Eigen::Index>(outcome), static_cast<Eigen::Index>(col)) =
          static_cast<double>(c) / static_cast<double>(shots[col]);
    }
  }
  return CalibrationMatrix(support, m);
}

// ---------------------------------------------------------------------------
// Order adjustment and joining

Matrix order_adjust(const CalibrationMatrix& c, const std::vector<SharedOrder>& shared) {
  const auto& support = c.support();
  std::vector<Matrix> left(support.size()), right(support.size());
  for (std::size_t pos = 0; pos < support.size(); ++pos) {
    left[pos] = right[pos] = Matrix::Identity(2, 2);
  }
  for (const SharedOrder& s : shared) {
    if (s.multiplicity == 0 || s.order >= s.multiplicity) {
      throw std::invalid_argument("order parameter outside 0..v-1");
    }
    auto it = std::find(support.begin(), support.end(), s.qubit);
    if (it == support.end()) throw std::invalid_argument("shared qubit not in patch support");
    if (s.multiplicity == 1) continue;
    const auto pos = static_cast<std::size_t>(it - support.begin());
    const Qubit keep[] = {s.qubit};
    const Matrix cj = normalized_partial_trace(c.entries(), support, keep);
    const double v = static_cast<double>(s.multiplicity);
    try {
      left[pos] = fractional_power(cj, static_cast<double>(s.multiplicity - 1 - s.order) / v);
      right[pos] = fractional_power(cj, static_cast<double>(s.order) / v);
    } catch (const SingularFactorError& e) {
      throw SingularFactorError(e.what(), {s.qubit});
    }
  }
  Matrix l = left[0], r = right[0];
  for (std::size_t pos = 1; pos < support.size(); ++pos) {
    l = kron(l, left[pos]);
    r = kron(r, right[pos]);
  }
  return invert_factor(l, support) * c.entries() * invert_factor(r, support);
}

Matrix order_adjust(const CalibrationMatrix& c, Qubit shared, std::size_t v, std::size_t v_a) {
  return order_adjust(c, std::vector<SharedOrder>{{shared, v, v_a}});
}

std::vector<SharedOrder> JoinPlan::orders_for(std::size_t index) const {
  std::vector<SharedOrder> out;
  for (Qubit q : patches.at(index).support()) {
    const SharedQubit& s = shared.at(q);
    if (s.multiplicity > 1) out.push_back({q, s.multiplicity, s.order.at(index)});
  }
  return out;
}

JoinPlan make_join_plan(std::vector<CalibrationMatrix> patches) {
  if (patches.empty()) throw std::invalid_argument("no patches to join");
  std::stable_sort(patches.begin(), patches.end(),
                   [](const CalibrationMatrix& x, const CalibrationMatrix& y) {
                     return x.support() < y.support();
                   });
  for (std::size_t i = 0; i < patches.size(); ++i) {
    for (std::size_t j = i + 1; j < patches.size(); ++j) {
      const BasisState overlap =
          support_mask(patches[i].support()) & support_mask(patches[j].support());
      if (std::popcount(overlap) > 1) {
        throw std::invalid_argument("patches share more than one qubit");
      }
    }
  }
  JoinPlan plan;
  for (std::size_t i = 0; i < patches.size(); ++i) {
    for (Qubit q : patches[i].support()) {
      SharedQubit& s = plan.shared[q];
      s.order[i] = s.multiplicity++;
    }
  }
  plan.patches = std::move(patches);
  return plan;
}

void validate_join_plan(const JoinPlan& plan) {
  std::map<Qubit, std::size_t> counted;
  for (std::size_t i = 0; i < plan.patches.size(); ++i) {
    for (Qubit q : plan.patches[i].support()) {
      auto it = plan.shared.find(q);
      if (it == plan.shared.end() || !it->second.order.contains(i)) {
        throw std::invalid_argument("missing order assignment for qubit " + std::to_string(q));
      }
      ++counted[q];
    }
  }
  for (const auto& [q, s] : plan.shared) {
    if (counted[q] != s.multiplicity || s.order.size() != s.multiplicity) {
      throw std::invalid_argument("inconsistent multiplicity for qubit " + std::to_string(q));
    }
    std::vector<bool> used(s.multiplicity, false);
    for (const auto& [patch, v_a] : s.order) {
      if (v_a >= s.multiplicity || used[v_a]) {
        throw std::invalid_argument("order values are not a permutation for qubit " +
                                    std::to_string(q));
      }
      used[v_a] = true;
    }
  }
}

SparseCalibration join(const JoinPlan& plan) {
  validate_join_plan(plan);
  SparseCalibration out;
  for (std::size_t i = 0; i < plan.patches.size(); ++i) {
    const CalibrationMatrix& c = plan.patches[i];
    out.factors.push_back({c.support(), order_adjust(c, plan.orders_for(i))});
  }
  return out;
}

AssembledCalibration assemble_for_measured(const JoinPlan& plan,
                                           const std::vector<Qubit>& measured) {
  if (measured.empty()) throw std::invalid_argument("no measured qubits");
  validate_join_plan(plan);
  const std::set<Qubit> meas(measured.begin(), measured.end());

  std::map<Qubit, std::size_t> inside_count;
  std::vector<std::vector<Qubit>> keeps(plan.patches.size());
  for (std::size_t i = 0; i < plan.patches.size(); ++i) {
    for (Qubit q : plan.patches[i].support()) {
      if (meas.contains(q)) keeps[i].push_back(q);
    }
    if (keeps[i].size() == plan.patches[i].num_qubits()) {
      for (Qubit q : keeps[i]) ++inside_count[q];
    }
  }

  // Qubits reached only through straddling patches collect one combined factor.
  std::map<Qubit, Matrix> combined;
  std::map<Qubit, std::size_t> first_seen;
  for (std::size_t i = 0; i < plan.patches.size(); ++i) {
    const auto& keep = keeps[i];
    if (keep.size() != 1 || plan.patches[i].num_qubits() == 1) continue;
    const Qubit q = keep.front();
    if (inside_count[q] > 0) continue;
    const Matrix traced = normalized_partial_trace(plan.patches[i].entries(),
                                                   plan.patches[i].support(), keep);
    const double v = static_cast<double>(plan.shared.at(q).multiplicity);
    const Matrix part = fractional_power(traced, 1.0 / v);
    if (!combined.contains(q)) {
      combined[q] = part;
      first_seen[q] = i;
    } else {
      combined[q] = part * combined[q];
    }
  }

  AssembledCalibration out;
  for (std::size_t i = 0; i < plan.patches.size(); ++i) {
    const CalibrationMatrix& c = plan.patches[i];
    const auto& keep = keeps[i];
    if (keep.empty()) continue;
    if (keep.size() == c.num_qubits()) {
      out.calibration.factors.push_back({c.support(), order_adjust(c, plan.orders_for(i))});
      continue;
    }
    if (keep.size() == 1) {
      const Qubit q = keep.front();
      if (inside_count[q] == 0) {
        if (first_seen.at(q) == i) {
          out.calibration.factors.push_back({keep, normalize_columns(combined.at(q))});
        }
        continue;
      }
      const Matrix traced = normalized_partial_trace(c.entries(), c.support(), keep);
      const double v = static_cast<double>(plan.shared.at(q).multiplicity);
      out.calibration.factors.push_back(
          {keep, normalize_columns(fractional_power(traced, 1.0 / v))});
      continue;
    }
    // Several measured qubits of a wider patch: adjust the traced matrix with
    // the original order parameters.
    CalibrationMatrix traced = normalized_partial_trace(c, keep);
    std::vector<SharedOrder> orders;
    for (const SharedOrder& s : plan.orders_for(i)) {
      if (meas.contains(s.qubit)) orders.push_back(s);
    }
    out.calibration.factors.push_back({keep, order_adjust(traced, orders)});
  }

  for (Qubit q : meas) {
    if (!plan.shared.contains(q)) {
      out.uncovered.push_back(q);
      out.calibration.factors.push_back({{q}, Matrix::Identity(2, 2)});
    }
  }
  return out;
}

SparseCalibration invert(const SparseCalibration& sc) {
  SparseCalibration out;
  out.direction = sc.direction == Direction::forward ? Direction::inverse : Direction::forward;
  for (auto it = sc.factors.rbegin(); it != sc.factors.rend(); ++it) {
    out.factors.push_back({it->support, invert_factor(it->matrix, it->support)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Application

namespace {

void check_factor(const Factor& f, std::size_t num_qubits) {
  validate_support(f.support);
  if (f.support.back() >= num_qubits) {
    throw std::invalid_argument("factor support outside the distribution register");
  }
  const Eigen::Index dim = Eigen::Index{1} << f.support.size();
  if (f.matrix.rows() != dim || f.matrix.cols() != dim) {
    throw std::invalid_argument("factor matrix dimension does not match its support");
  }
}

}  // namespace

Distribution apply_raw(const SparseCalibration& sc, const Distribution& d,
                       double cull_threshold) {
  if (cull_threshold < 0.0) throw std::invalid_argument("negative cull threshold");
  const std::size_t n = d.num_qubits();
  std::vector<Distribution::Entry> current = d.entries();
  for (const Factor& f : sc.factors) {
    check_factor(f, n);
    const BasisState mask = support_mask(f.support);
    const auto dim = static_cast<std::size_t>(f.matrix.rows());
    std::unordered_map<BasisState, double> next;
    next.reserve(current.size() * 2);
    for (const auto& [state, w] : current) {
      const auto col = static_cast<Eigen::Index>(gather_bits(state, f.support));
      const BasisState base = state & ~mask;
      for (std::size_t row = 0; row < dim; ++row) {
        const double m = f.matrix(static_cast<Eigen::Index>(row), col);
        if (m != 0.0) next[base | scatter_bits(row, f.support)] += m * w;
      }
    }
    double mass = 0.0;
    for (const auto& [state, w] : next) mass += std::abs(w);
    const double floor = cull_threshold * mass;
    current.clear();
    for (const auto& [state, w] : next) {
      if (w != 0.0 && std::abs(w) >= floor) current.emplace_back(state, w);
    }
    std::sort(current.begin(), current.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  return Distribution(n, std::move(current));
}

Distribution apply(const SparseCalibration& sc, const Distribution& d, double cull_threshold) {
  return apply_raw(sc, d, cull_threshold).finalized();
}

Matrix embed_factor(const Factor& f, std::size_t num_qubits) {
  check_factor(f, num_qubits);
  if (num_qubits > 16) throw std::invalid_argument("dense embedding limited to 16 qubits");
  const std::size_t dim = std::size_t{1} << num_qubits;
  const BasisState mask = support_mask(f.support);
  const auto local_dim = static_cast<std::size_t>(f.matrix.rows());
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t c = 0; c < dim; ++c) {
    const BasisState state = from_dense_index(c, num_qubits);
    const auto lc = static_cast<Eigen::Index>(gather_bits(state, f.support));
    const BasisState base = state & ~mask;
    for (std::size_t lr = 0; lr < local_dim; ++lr) {
      const auto r = dense_index(base | scatter_bits(lr, f.support), num_qubits);
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          f.matrix(static_cast<Eigen::Index>(lr), lc);
    }
  }
  return out;
}

Matrix dense_matrix(const SparseCalibration& sc, std::size_t num_qubits) {
  const Eigen::Index dim = Eigen::Index{1} << num_qubits;
  Matrix out = Matrix::Identity(dim, dim);
  for (const Factor& f : sc.factors) out = embed_factor(f, num_qubits) * out;
  return out;
}

Eigen::VectorXd to_dense(const Distribution& d) {
  if (d.num_qubits() > 24) throw std::invalid_argument("dense vector limited to 24 qubits");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(Eigen::Index{1} << d.num_qubits());
  for (const auto& [state, w] : d.entries()) {
    v(static_cast<Eigen::Index>(dense_index(state, d.num_qubits()))) = w;
  }
  return v;
}

Distribution from_dense(const Eigen::VectorXd& v, std::size_t num_qubits) {
  if (v.size() != (Eigen::Index{1} << num_qubits)) {
    throw std::invalid_argument("dense vector length does not match register");
  }
  std::vector<Distribution::Entry> entries;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) != 0.0) {
      entries.emplace_back(from_dense_index(static_cast<std::size_t>(i), num_qubits), v(i));
    }
  }
  return Distribution(num_qubits, std::move(entries));
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return data;
}

Matrix matrix_from_json(const nlohmann::json& j, std::size_t width) {
  const auto data = j.get<std::vector<double>>();
  const std::size_t dim = std::size_t{1} << width;
  if (data.size() != dim * dim) throw std::invalid_argument("matrix data has the wrong length");
  Matrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = data[r * dim + c];
    }
  }
  return m;
}

}  // namespace

nlohmann::json to_json(const Factor& f) {
  return {{"support", f.support}, {"data", matrix_to_json(f.matrix)}};
}

Factor factor_from_json(const nlohmann::json& j) {
  Factor f;
  f.support = j.at("support").get<std::vector<Qubit>>();
  validate_support(f.support);
  f.matrix = matrix_from_json(j.at("data"), f.support.size());
  return f;
}

nlohmann::json to_json(const CalibrationMatrix& c) {
  return {{"support", c.support()}, {"data", matrix_to_json(c.entries())}};
}

CalibrationMatrix calibration_matrix_from_json(const nlohmann::json& j) {
  Factor f = factor_from_json(j);
  return CalibrationMatrix(std::move(f.support), std::move(f.matrix));
}

nlohmann::json to_json(const SparseCalibration& sc) {
  nlohmann::json factors = nlohmann::json::array();
  for (const Factor& f : sc.factors) factors.push_back(to_json(f));
  return {{"direction", sc.direction == Direction::forward ? "forward" : "inverse"},
          {"factors", factors}};
}

SparseCalibration sparse_calibration_from_json(const nlohmann::json& j) {
  SparseCalibration sc;
  const auto direction = j.at("direction").get<std::string>();
  if (direction == "forward") {
    sc.direction = Direction::forward;
  } else if (direction == "inverse") {
    sc.direction = Direction::inverse;
  } else {
    throw std::invalid_argument("unknown calibration direction: " + direction);
  }
  for (const auto& f : j.at("factors")) sc.factors.push_back(factor_from_json(f));
  return sc;
}

}  // namespace cmc

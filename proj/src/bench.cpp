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

#include "cmc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cmc {

double success_probability(const Distribution& observed, const Distribution& verified) {
  if (observed.num_qubits() != verified.num_qubits()) {
    throw std::invalid_argument("distributions disagree on register size");
  }
  double mass = 0.0;
  for (const auto& [s, w] : verified.entries()) {
    if (w > 0.0) mass += observed.probability(s);
  }
  return std::clamp(mass, 0.0, 1.0);
}

double one_norm(const Distribution& a, const Distribution& b) {
  if (a.num_qubits() != b.num_qubits()) {
    throw std::invalid_argument("distributions disagree on register size");
  }
  double sum = 0.0;
  auto ia = a.entries().begin(), ib = b.entries().begin();
  while (ia != a.entries().end() || ib != b.entries().end()) {
    if (ib == b.entries().end() || (ia != a.entries().end() && ia->first < ib->first)) {
      sum += std::abs(ia->second);
      ++ia;
    } else if (ia == a.entries().end() || ib->first < ia->first) {
      sum += std::abs(ib->second);
      ++ib;
    } else {
      sum += std::abs(ia->second - ib->second);
      ++ia;
      ++ib;
    }
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Files

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("failed writing " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Configuration

CouplingMap ArchitectureSpec::build() const {
  if (!file.empty()) return coupling_map_from_json(read_json_file(file));
  if (preset == "tokyo") return tokyo_coupling_map();
  if (preset == "nairobi") return nairobi_coupling_map();
  if (preset == "quito") return quito_coupling_map();
  if (!preset.empty()) throw std::invalid_argument("unknown architecture preset: " + preset);
  if (!kind) throw std::invalid_argument("architecture needs a kind, preset or file");
  return generate_architecture(*kind, params);
}

ArchitectureSpec architecture_spec_from_json(const nlohmann::json& j) {
  ArchitectureSpec spec;
  spec.preset = j.value("preset", "");
  spec.file = j.value("file", "");
  if (j.contains("kind")) spec.kind = parse_architecture_kind(j.at("kind").get<std::string>());
  spec.params.num_qubits = j.value("num_qubits", std::size_t{0});
  spec.params.rows = j.value("rows", std::size_t{0});
  spec.params.cols = j.value("cols", std::size_t{0});
  spec.label = j.value("label", "");
  if (spec.label.empty()) {
    if (!spec.preset.empty()) {
      spec.label = spec.preset;
    } else if (!spec.file.empty()) {
      spec.label = std::filesystem::path(spec.file).stem().string();
    } else if (spec.kind) {
      spec.label = to_string(*spec.kind);
      if (spec.params.rows > 0) {
        spec.label += "_" + std::to_string(spec.params.rows) + "x" + std::to_string(spec.params.cols);
      } else {
        spec.label += "_" + std::to_string(spec.params.num_qubits);
      }
    }
  }
  return spec;
}

nlohmann::json to_json(const ArchitectureSpec& spec) {
  nlohmann::json j = {{"label", spec.label}};
  if (!spec.preset.empty()) j["preset"] = spec.preset;
  if (!spec.file.empty()) j["file"] = spec.file;
  if (spec.kind) {
    j["kind"] = to_string(*spec.kind);
    if (spec.params.num_qubits) j["num_qubits"] = spec.params.num_qubits;
    if (spec.params.rows) j["rows"] = spec.params.rows;
    if (spec.params.cols) j["cols"] = spec.params.cols;
  }
  return j;
}

NoiseSpec NoiseConfig::build(std::size_t num_qubits, std::uint64_t seed) const {
  NoiseSpec spec;
  if (!file.empty()) {
    spec = noise_spec_from_json(read_json_file(file));
    if (spec.num_qubits != num_qubits) {
      throw std::invalid_argument("noise file register does not match the architecture");
    }
  } else {
    spec = random_readout_noise(num_qubits, low, high, seed);
    spec.gate_flip = gate_flip;
  }
  if (!correlated.empty()) {
    nlohmann::json doc = to_json(spec);
    for (const auto& ch : correlated) doc["correlated"].push_back(ch);
    spec = noise_spec_from_json(doc);
  }
  spec.validate();
  return spec;
}

NoiseConfig noise_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {"file", "readout", "correlated", "gate_flip"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("unknown noise option: " + key);
  }
  NoiseConfig c;
  c.file = j.value("file", "");
  if (j.contains("readout")) {
    c.low = j.at("readout").at("low").get<double>();
    c.high = j.at("readout").at("high").get<double>();
  }
  for (const auto& ch : j.value("correlated", nlohmann::json::array())) c.correlated.push_back(ch);
  c.gate_flip = j.value("gate_flip", 0.0);
  if (!(c.low >= 0.0 && c.low <= c.high && c.high <= 1.0)) {
    throw std::invalid_argument("readout rates must satisfy 0 <= low <= high <= 1");
  }
  return c;
}

nlohmann::json to_json(const NoiseConfig& c) {
  nlohmann::json j = {{"readout", {{"low", c.low}, {"high", c.high}}},
                      {"correlated", c.correlated},
                      {"gate_flip", c.gate_flip}};
  if (!c.file.empty()) j["file"] = c.file;
  return j;
}

void ExperimentConfig::validate() const {
  if (architectures.empty()) throw std::invalid_argument("experiment has no architecture");
  if (methods.empty()) throw std::invalid_argument("experiment has no methods");
  if (shots == 0) throw std::invalid_argument("shots must be at least 1");
  if (trials == 0) throw std::invalid_argument("trials must be at least 1");
  for (const auto& a : architectures) {
    if (!a.file.empty() && !std::filesystem::exists(a.file)) {
      throw std::invalid_argument("coupling map file not found: " + a.file);
    }
  }
  if (!noise.file.empty() && !std::filesystem::exists(noise.file)) {
    throw std::invalid_argument("noise file not found: " + noise.file);
  }
  for (const auto& m : methods) m.validate();
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                             const std::filesystem::path& base_dir) {
  static const std::set<std::string> known = {"architecture", "architectures", "noise",
                                              "methods",      "shots",         "trials",
                                              "seed",         "exact",         "record_timing"};
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("unknown experiment option: " + key);
  }
  auto resolve = [&](std::string& file) {
    if (!file.empty() && std::filesystem::path(file).is_relative() && !base_dir.empty()) {
      file = (base_dir / file).string();
    }
  };
  ExperimentConfig c;
  if (j.contains("architecture")) c.architectures.push_back(architecture_spec_from_json(j["architecture"]));
  for (const auto& a : j.value("architectures", nlohmann::json::array())) {
    c.architectures.push_back(architecture_spec_from_json(a));
  }
  for (auto& a : c.architectures) resolve(a.file);
  if (j.contains("noise")) c.noise = noise_config_from_json(j.at("noise"));
  resolve(c.noise.file);
  for (const auto& m : j.at("methods")) c.methods.push_back(strategy_config_from_json(m));
  c.shots = j.value("shots", c.shots);
  c.trials = j.value("trials", c.trials);
  c.seed = j.value("seed", c.seed);
  c.exact = j.value("exact", c.exact);
  c.record_timing = j.value("record_timing", c.record_timing);
  c.validate();
  return c;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json archs = nlohmann::json::array();
  for (const auto& a : c.architectures) archs.push_back(to_json(a));
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : c.methods) methods.push_back(to_json(m));
  return {{"architectures", archs}, {"noise", to_json(c.noise)}, {"methods", methods},
          {"shots", c.shots},       {"trials", c.trials},        {"seed", c.seed},
          {"exact", c.exact},       {"record_timing", c.record_timing}};
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return experiment_config_from_json(read_json_file(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// Running

nlohmann::json to_json(const ResultRecord& r) {
  return {{"method", r.method},
          {"architecture", r.architecture},
          {"n", r.n},
          {"trial", r.trial},
          {"seed", r.seed},
          {"success_probability", r.success_probability},
          {"one_norm", r.one_norm},
          {"shots_calibration", r.shots_calibration},
          {"shots_circuit", r.shots_circuit},
          {"shots_amortized", r.shots_amortized},
          {"circuits", r.circuits},
          {"wall_ms", r.wall_ms},
          {"diagnostics", r.diagnostics},
          {"error", r.error}};
}

ResultRecord result_record_from_json(const nlohmann::json& j) {
  ResultRecord r;
  r.method = j.at("method").get<std::string>();
  r.architecture = j.value("architecture", "");
  r.n = j.at("n").get<std::size_t>();
  r.trial = j.at("trial").get<std::size_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.success_probability = j.at("success_probability").get<double>();
  r.one_norm = j.at("one_norm").get<double>();
  r.shots_calibration = j.at("shots_calibration").get<std::uint64_t>();
  r.shots_circuit = j.at("shots_circuit").get<std::uint64_t>();
  r.shots_amortized = j.value("shots_amortized", std::uint64_t{0});
  r.circuits = j.value("circuits", std::size_t{0});
  r.wall_ms = j.value("wall_ms", 0.0);
  r.diagnostics = j.value("diagnostics", std::vector<std::string>{});
  r.error = j.value("error", "");
  return r;
}

std::vector<ResultRecord> run_experiment(const ExperimentConfig& config, const RecordSink& sink) {
  config.validate();
  std::vector<ResultRecord> out;
  for (std::size_t a = 0; a < config.architectures.size(); ++a) {
    const ArchitectureSpec& arch = config.architectures[a];
    const CouplingMap map = arch.build();
    const std::size_t n = map.num_qubits();
    const Circuit circuit = ghz_circuit(map);
    const Distribution ideal = ideal_distribution(circuit);
    for (std::size_t trial = 0; trial < config.trials; ++trial) {
      const std::uint64_t trial_seed = config.seed ^ trial;
      const std::uint64_t arch_seed = mix_seed(trial_seed ^ mix_seed(a));
      const NoiseSpec noise = config.noise.build(n, arch_seed);
      for (std::size_t m = 0; m < config.methods.size(); ++m) {
        const StrategyConfig& method = config.methods[m];
        ResultRecord rec;
        rec.method = method.name();
        rec.architecture = arch.label;
        rec.n = n;
        rec.trial = trial;
        rec.seed = trial_seed;
        const std::uint64_t stream = mix_seed(arch_seed + 0x9e37 * (m + 1));
        Backend backend(noise, stream, config.exact);
        const auto start = std::chrono::steady_clock::now();
        try {
          const StrategyContext ctx{circuit, map, backend, ShotBudget{config.shots}, stream};
          const MethodResult result = run_strategy(ctx, method);
          rec.success_probability = success_probability(result.mitigated, ideal);
          rec.one_norm = one_norm(result.mitigated, ideal);
          rec.shots_calibration = result.ledger.get("calibration");
          rec.shots_circuit = result.ledger.get("circuit");
          rec.shots_amortized = result.amortized_shots;
          rec.circuits = result.circuits;
          rec.diagnostics = result.diagnostics;
        } catch (const std::exception& e) {
          rec.error = e.what();
          rec.one_norm = std::nan("");
          rec.success_probability = std::nan("");
        }
        if (config.record_timing) {
          rec.wall_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
        }
        if (sink) sink(rec);
        out.push_back(std::move(rec));
      }
    }
  }
  return out;
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw std::invalid_argument("unknown output format: " + std::string(name));
}

namespace {

std::string number(double v, const char* fmt = "%.17g") {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

}  // namespace

std::string format_csv(const std::vector<ResultRecord>& records) {
  std::ostringstream out;
  out << "method,n,trial,seed,success_probability,one_norm,shots_calibration,shots_circuit,"
         "wall_ms\n";
  for (const auto& r : records) {
    out << r.method << ',' << r.n << ',' << r.trial << ',' << r.seed << ','
        << number(r.success_probability) << ',' << number(r.one_norm) << ','
        << r.shots_calibration << ',' << r.shots_circuit << ',' << number(r.wall_ms, "%.3f")
        << '\n';
  }
  return out.str();
}

std::string format_json(const std::vector<ResultRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) arr.push_back(to_json(r));
  return arr.dump(2) + "\n";
}

void emit_results(const std::vector<ResultRecord>& records, OutputFormat format,
                  const std::filesystem::path& path) {
  if (records.empty()) throw std::invalid_argument("no records to emit");
  write_text_file(path, format == OutputFormat::csv ? format_csv(records) : format_json(records));
}

std::vector<ResultRecord> load_results_json(const std::filesystem::path& path) {
  std::vector<ResultRecord> out;
  for (const auto& r : read_json_file(path)) out.push_back(result_record_from_json(r));
  return out;
}

// ---------------------------------------------------------------------------
// Calibration store

SparseCalibration CalibrationStore::mitigator(const std::vector<Qubit>& measured) const {
  const JoinPlan plan = make_join_plan(matrices);
  return invert(assemble_for_measured(plan, measured).calibration);
}

nlohmann::json to_json(const CalibrationStore& store) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : store.records) records.push_back(to_json(r));
  nlohmann::json matrices = nlohmann::json::array();
  for (const auto& m : store.matrices) matrices.push_back(to_json(m));
  nlohmann::json j = {{"version", kCalibrationStoreVersion},
                      {"device", store.device},
                      {"timestamp", store.timestamp},
                      {"num_qubits", store.num_qubits},
                      {"plan", to_json(store.plan)},
                      {"records", records},
                      {"matrices", matrices}};
  if (store.err_map) j["err_map"] = to_json(*store.err_map);
  return j;
}

CalibrationStore calibration_store_from_json(const nlohmann::json& j) {
  const int version = j.at("version").get<int>();
  if (version != kCalibrationStoreVersion) {
    throw std::runtime_error("calibration store version " + std::to_string(version) +
                             " is not supported (expected " +
                             std::to_string(kCalibrationStoreVersion) + ")");
  }
  CalibrationStore s;
  s.device = j.value("device", "");
  s.timestamp = j.value("timestamp", "");
  s.num_qubits = j.at("num_qubits").get<std::size_t>();
  s.plan = patch_plan_from_json(j.at("plan"));
  if (j.contains("err_map")) s.err_map = err_map_from_json(j.at("err_map"));
  for (const auto& r : j.at("records")) s.records.push_back(counts_record_from_json(r));
  for (const auto& m : j.at("matrices")) {
    s.matrices.push_back(calibration_matrix_from_json(m));
    if (s.matrices.back().support().back() >= s.num_qubits) {
      throw std::runtime_error("stored matrix support outside the register");
    }
  }
  if (s.matrices.empty()) throw std::runtime_error("calibration store holds no matrices");
  return s;
}

void store_calibration(const CalibrationStore& store, const std::filesystem::path& path) {
  write_text_file(path, to_json(store).dump(2) + "\n");
}

CalibrationStore load_calibration(const std::filesystem::path& path) {
  try {
    return calibration_store_from_json(read_json_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("corrupted calibration store " + path.string() + ": " + e.what());
  }
}

}  // namespace cmc

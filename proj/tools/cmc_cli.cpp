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

// Command-line front end: device graphs, patch plans, error maps,
// calibration stores, mitigation of counts files, benchmark sweeps and the
// X-chain experiment.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmc/bench.hpp"
#include "cmc/calibration.hpp"
#include "cmc/noise.hpp"
#include "cmc/strategies.hpp"
#include "cmc/topology.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cmc {
namespace {

struct Common {
  std::uint64_t seed = 1;
  std::uint64_t shots = 0;  // 0: command default
  std::size_t trials = 0;   // 0: config value
  std::string out;
  std::string format = "json";
  std::string config;
};

struct DeviceOptions {
  std::string arch = "tokyo";
  std::string noise;
  double low = 0.02;
  double high = 0.08;
};

/// "tokyo", "grid:4x4", "heavy_hex:16", "random:100" or a coupling-map file.
CouplingMap build_map(const std::string& text, std::uint64_t seed, double degree = 4.0) {
  if (fs::exists(text)) return coupling_map_from_json(read_json_file(text));
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    ArchitectureSpec spec;
    spec.preset = text;
    return spec.build();
  }
  const std::string kind = text.substr(0, colon), size = text.substr(colon + 1);
  std::size_t rows = 0, cols = 0, n = 0;
  if (std::sscanf(size.c_str(), "%zux%zu", &rows, &cols) == 2) {
    n = 0;
  } else if (std::sscanf(size.c_str(), "%zu", &n) == 1) {
    rows = cols = 0;
  } else {
    throw std::invalid_argument("bad architecture size: " + size);
  }
  if (kind == "random") return random_coupling_map(n, degree, seed);
  ArchitectureParams p;
  p.num_qubits = n;
  p.rows = rows;
  p.cols = cols;
  return generate_architecture(parse_architecture_kind(kind), p);
}

NoiseSpec build_noise(const DeviceOptions& dev, std::size_t n, std::uint64_t seed) {
  NoiseConfig cfg;
  cfg.low = dev.low;
  cfg.high = dev.high;
  cfg.file = dev.noise;
  return cfg.build(n, seed);
}

void add_device_options(CLI::App* cmd, DeviceOptions& dev, bool with_noise) {
  cmd->add_option("--arch", dev.arch, "preset, kind:N, kind:RxC or a coupling-map JSON file");
  if (!with_noise) return;
  cmd->add_option("--noise", dev.noise, "NoiseSpec JSON file (default: random readout rates)");
  cmd->add_option("--low", dev.low, "lowest random readout flip rate");
  cmd->add_option("--high", dev.high, "highest random readout flip rate");
}

void write_output(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
  } else {
    write_text_file(c.out, text);
  }
}

std::string join_qubits(const std::vector<Qubit>& qs, char sep = ' ') {
  std::string s;
  for (Qubit q : qs) s += (s.empty() ? "" : std::string(1, sep)) + std::to_string(q);
  return s;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------------------

int cmd_gen_arch(const Common& c, const DeviceOptions& dev, double degree) {
  const CouplingMap map = build_map(dev.arch, c.seed, degree);
  if (c.format == "csv") {
    std::string text = "a,b\n";
    for (const Edge& e : map.edges()) text += std::to_string(e.a) + "," + std::to_string(e.b) + "\n";
    write_output(c, text);
  } else {
    write_output(c, to_json(map).dump(2) + "\n");
  }
  return 0;
}

int cmd_patch_plan(const Common& c, const DeviceOptions& dev, std::size_t k) {
  const CouplingMap map = build_map(dev.arch, c.seed);
  const PatchPlan plan = greedy_patch_plan(map, k);
  if (c.format == "csv") {
    std::string text = "group,patch\n";
    for (std::size_t g = 0; g < plan.groups.size(); ++g) {
      for (const Patch& p : plan.groups[g]) text += std::to_string(g) + "," + join_qubits(p) + "\n";
    }
    write_output(c, text);
  } else {
    json j = to_json(plan);
    j["calibration_circuits"] = calibration_circuit_count(plan);
    j["per_edge_circuits"] = 4 * map.num_edges();
    write_output(c, j.dump(2) + "\n");
  }
  return 0;
}

/// Single- and two-qubit records grouped by support, then estimated.
CorrelationWeights weights_from_records(const std::vector<CountsRecord>& records,
                                        std::size_t locality) {
  std::map<std::vector<Qubit>, std::vector<CountsRecord>> by_support;
  for (const auto& r : records) by_support[r.support].push_back(r);
  std::map<Qubit, CalibrationMatrix> singles;
  std::map<Edge, CalibrationMatrix> pairs;
  for (const auto& [support, recs] : by_support) {
    if (support.size() == 1) singles.emplace(support[0], estimate_matrix(recs));
    if (support.size() == 2) pairs.emplace(Edge::of(support[0], support[1]), estimate_matrix(recs));
  }
  return correlation_weights(singles, pairs, locality);
}

std::vector<CountsRecord> read_records(const fs::path& path) {
  const json j = read_json_file(path);
  const json& arr = j.is_array() ? j : j.at("records");
  std::vector<CountsRecord> out;
  for (const auto& r : arr) out.push_back(counts_record_from_json(r));
  return out;
}

int cmd_err_map(const Common& c, const DeviceOptions& dev, const std::string& counts,
                std::size_t locality, std::size_t max_edges) {
  CorrelationWeights w;
  std::size_t n = 0;
  if (!counts.empty()) {
    const auto records = read_records(counts);
    w = weights_from_records(records, locality);
    for (const auto& r : records) n = std::max(n, r.support.back() + 1);
  } else {
    const CouplingMap map = build_map(dev.arch, c.seed);
    n = map.num_qubits();
    Backend backend(build_noise(dev, n, c.seed), mix_seed(c.seed));
    w = measure_correlation_weights(backend, map, locality, c.shots ? c.shots : 1000);
  }
  const ErrMap em = err_map(w, max_edges ? max_edges : n);
  if (c.format == "csv") {
    std::string text = "a,b,weight,selected\n";
    for (const auto& [e, x] : w.weights) {
      const bool chosen = std::find(em.edges.begin(), em.edges.end(), e) != em.edges.end();
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      text += std::to_string(e.a) + "," + std::to_string(e.b) + "," + buf + "," +
              (chosen ? "1" : "0") + "\n";
    }
    write_output(c, text);
  } else {
    write_output(c, json{{"weights", to_json(w)}, {"err_map", to_json(em)}}.dump(2) + "\n");
  }
  return 0;
}

int cmd_calibrate(const Common& c, const DeviceOptions& dev, std::size_t k,
                  const std::string& err_map_file, const std::string& counts,
                  const std::string& timestamp) {
  CalibrationStore store;
  store.timestamp = timestamp.empty() ? utc_now() : timestamp;
  if (!counts.empty()) {
    const auto records = read_records(counts);
    std::map<std::vector<Qubit>, std::vector<CountsRecord>> by_support;
    for (const auto& r : records) {
      by_support[r.support].push_back(r);
      store.num_qubits = std::max(store.num_qubits, r.support.back() + 1);
      if (store.device.empty()) store.device = r.device;
    }
    std::vector<Patch> patches;
    for (const auto& [support, recs] : by_support) {
      store.matrices.push_back(estimate_matrix(recs));
      patches.push_back(support);
    }
    store.plan.separation = k;
    store.plan.groups.push_back(patches);
    store.records = records;
  } else {
    CouplingMap map = build_map(dev.arch, c.seed);
    if (!err_map_file.empty()) {
      const json j = read_json_file(err_map_file);
      store.err_map = err_map_from_json(j.contains("err_map") ? j.at("err_map") : j);
      map = store.err_map->as_coupling_map(map.num_qubits());
    }
    store.num_qubits = map.num_qubits();
    store.device = dev.arch;
    const PatchPlan plan = calibration_plan(map, k);
    const std::uint64_t total = c.shots ? c.shots : 8000;
    const std::uint64_t per = total / std::max<std::size_t>(1, calibration_circuit_count(plan));
    if (per == 0) throw std::runtime_error("too few shots for the calibration circuits");
    Backend backend(build_noise(dev, store.num_qubits, c.seed), mix_seed(c.seed));
    const PatchCalibration pc = calibrate_patches(backend, plan, per);
    store.plan = pc.plan;
    store.matrices = pc.matrices;
    store.records = pc.records;
    for (auto& r : store.records) {
      r.device = store.device;
      r.timestamp = store.timestamp;
    }
    std::cerr << pc.circuits << " calibration circuits, " << pc.shots << " shots\n";
  }
  if (c.out.empty()) {
    std::cout << to_json(store).dump(2) << "\n";
  } else {
    store_calibration(store, c.out);
  }
  return 0;
}

int cmd_mitigate(const Common& c, const std::string& store_file, const std::string& counts_file,
                 std::vector<Qubit> measured, double cull) {
  const CalibrationStore store = load_calibration(store_file);
  const json j = read_json_file(counts_file);
  const json& table = j.contains("counts") ? j.at("counts") : j;
  std::size_t width = 0;
  Counts counts;
  for (const auto& [bits, n] : table.items()) {
    if (width == 0) width = bits.size();
    if (bits.size() != width) throw std::invalid_argument("counts bitstrings differ in length");
    counts[from_bitstring(bits)] += n.get<std::uint64_t>();
  }
  if (width != store.num_qubits) {
    throw std::invalid_argument("counts cover " + std::to_string(width) +
                                " qubits but the store has " + std::to_string(store.num_qubits));
  }
  if (measured.empty()) {
    for (Qubit q = 0; q < width; ++q) measured.push_back(q);
  }
  const Distribution observed = Distribution::from_counts(width, counts);
  const Distribution mitigated = apply(store.mitigator(measured), observed, cull);
  if (c.format == "csv") {
    std::string text = "bitstring,probability\n";
    for (const auto& [s, p] : mitigated.entries()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", p);
      text += to_bitstring(s, width) + "," + buf + "\n";
    }
    write_output(c, text);
  } else {
    json out = json::object();
    for (const auto& [s, p] : mitigated.entries()) out[to_bitstring(s, width)] = p;
    write_output(c, out.dump(2) + "\n");
  }
  return 0;
}

int cmd_bench(const Common& c, bool seed_given, bool exact) {
  if (c.config.empty()) throw std::invalid_argument("bench needs --config");
  ExperimentConfig config = load_experiment_config(c.config);
  if (seed_given) config.seed = c.seed;
  if (c.shots) config.shots = c.shots;
  if (c.trials) config.trials = c.trials;
  if (exact) config.exact = true;
  config.validate();
  const OutputFormat format = parse_output_format(c.format);

  // Records stream to a side file as they finish, one line each, so an
  // interrupted sweep keeps everything but the record in flight.
  std::ofstream partial;
  fs::path partial_path;
  if (!c.out.empty()) {
    partial_path = c.out + ".partial";
    partial.open(partial_path);
    if (!partial) throw std::runtime_error("cannot write " + partial_path.string());
  }
  std::size_t done = 0;
  const RecordSink sink = [&](const ResultRecord& r) {
    ++done;
    if (partial.is_open()) {
      partial << to_json(r).dump() << "\n";
      partial.flush();
    }
    if (!r.error.empty()) std::cerr << r.method << " on " << r.architecture << ": " << r.error << "\n";
  };
  const auto records = run_experiment(config, sink);
  if (c.out.empty()) {
    std::cout << (format == OutputFormat::csv ? format_csv(records) : format_json(records));
  } else {
    emit_results(records, format, c.out);
    partial.close();
    fs::remove(partial_path);
    std::cerr << done << " records written to " << c.out << "\n";
  }
  return 0;
}

int cmd_x_chain(const Common& c, std::size_t depth, double p01, double p10, double gate_flip) {
  const auto points = x_chain_experiment(depth, {p01, p10}, gate_flip, c.shots ? c.shots : 4000, c.seed);
  if (c.format == "csv") {
    std::string text = "depth,ideal_bit,error_rate,expected\n";
    for (const auto& p : points) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "%zu,%d,%.17g,%.17g\n", p.depth, p.ideal_bit, p.error_rate,
                    p.expected);
      text += buf;
    }
    write_output(c, text);
  } else {
    json arr = json::array();
    for (const auto& p : points) {
      arr.push_back({{"depth", p.depth},
                     {"ideal_bit", p.ideal_bit},
                     {"error_rate", p.error_rate},
                     {"expected", p.expected}});
    }
    write_output(c, arr.dump(2) + "\n");
  }
  return 0;
}

}  // namespace
}  // namespace cmc

int main(int argc, char** argv) {
  using namespace cmc;
  CLI::App app{"Coupling map calibration for readout-error mitigation"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  auto* seed_opt = app.add_option("--seed", common.seed, "master seed");
  app.add_option("--shots", common.shots, "shot count (meaning depends on the command)");
  app.add_option("--trials", common.trials, "trials per method (bench)");
  app.add_option("--out", common.out, "output file (default: stdout)");
  app.add_option("--format", common.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--config", common.config, "experiment config JSON (bench)");

  DeviceOptions dev;

  auto* gen = app.add_subcommand("gen-arch", "emit a coupling-map JSON");
  double degree = 4.0;
  add_device_options(gen, dev, false);
  gen->add_option("--degree", degree, "mean degree for random:N maps");

  auto* plan = app.add_subcommand("patch-plan", "group edges into simultaneous patches");
  std::size_t separation = 1;
  add_device_options(plan, dev, false);
  plan->add_option("--separation,-k", separation, "minimum distance between patches in a group");

  auto* err = app.add_subcommand("err-map", "error coupling map from correlation weights");
  std::string counts;
  std::size_t locality = 3, max_edges = 0;
  add_device_options(err, dev, true);
  err->add_option("--counts", counts, "CountsRecord list or calibration store to read");
  err->add_option("--locality", locality, "largest coupling-map distance for candidate pairs");
  err->add_option("--max-edges", max_edges, "edge limit (default: number of qubits)");

  auto* cal = app.add_subcommand("calibrate", "build and store a patch calibration");
  std::string err_map_file, timestamp;
  add_device_options(cal, dev, true);
  cal->add_option("--separation,-k", separation, "minimum distance between patches in a group");
  cal->add_option("--err-map", err_map_file, "calibrate the edges of an err-map output instead");
  cal->add_option("--counts", counts, "ingest CountsRecords instead of simulating");
  cal->add_option("--timestamp", timestamp, "ISO 8601 stamp (default: now)");

  auto* mit = app.add_subcommand("mitigate", "apply a stored calibration to a counts file");
  std::string store_file;
  std::vector<Qubit> measured;
  double cull = kDefaultCullThreshold;
  mit->add_option("--store", store_file, "calibration store JSON")->required();
  mit->add_option("--counts", counts, "JSON object of bitstring counts")->required();
  mit->add_option("--measured", measured, "measured qubits (default: all)");
  mit->add_option("--cull", cull, "drop intermediate entries below this magnitude");

  auto* bench = app.add_subcommand("bench", "run a benchmark sweep from --config");
  bool exact = false;
  bench->add_flag("--exact", exact, "infinite-shot simulation");

  auto* xc = app.add_subcommand("x-chain", "error rate against X-gate chain depth");
  std::size_t depth = 50;
  double p01 = 0.02, p10 = 0.08, gate_flip = 0.0;
  xc->add_option("--depth", depth, "largest chain depth");
  xc->add_option("--p01", p01, "readout flip rate 0 -> 1");
  xc->add_option("--p10", p10, "readout flip rate 1 -> 0");
  xc->add_option("--gate-flip", gate_flip, "X error probability per gate");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen_arch(common, dev, degree);
    if (*plan) return cmd_patch_plan(common, dev, separation);
    if (*err) return cmd_err_map(common, dev, counts, locality, max_edges);
    if (*cal) return cmd_calibrate(common, dev, separation, err_map_file, counts, timestamp);
    if (*mit) return cmd_mitigate(common, store_file, counts, measured, cull);
    if (*bench) return cmd_bench(common, seed_opt->count() > 0, exact);
    if (*xc) return cmd_x_chain(common, depth, p01, p10, gate_flip);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

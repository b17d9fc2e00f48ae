#pragma once

// Stage / cluster traces: JSON schema, validation, and the synthetic workload generator.
//
// stages file:   [{"stage_id": int, "default_config": {"cpu_cores": float, "mem_gb": float},
//                  "instances": [{"id": int, "input_rows": int, "input_bytes": int}]}]
// machines file: {"machines": [{"id": int, "hw_class": string, "cpu_util": float, "mem_util": float,
//                               "cpu_capacity": float, "mem_capacity": float}]}

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "stagesched/core_model.hpp"
#include "stagesched/errors.hpp"

namespace stagesched {

using json = nlohmann::json;

struct StageTrace {
  std::int64_t stage_id = 0;
  std::vector<InstanceSpec> instances;
  ResourceConfig default_config;

  friend bool operator==(const StageTrace&, const StageTrace&) = default;
};

struct ClusterTrace {
  std::vector<MachineSpec> machines;

  friend bool operator==(const ClusterTrace&, const ClusterTrace&) = default;
};

struct Traces {
  std::vector<StageTrace> stages;
  ClusterTrace cluster;
};

namespace detail {

template <class T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw LoadError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw LoadError(where + ": missing field '" + key + "'");
  try {
    if constexpr (std::is_integral_v<T>) {
      if (!it->is_number_integer()) throw LoadError(where + "." + key + ": expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) throw LoadError(where + "." + key + ": expected a number");
    }
    return it->get<T>();
  } catch (const json::exception& e) {
    throw LoadError(where + "." + key + ": " + e.what());
  }
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path.string());
  out << text;
}

}  // namespace detail

inline json to_json(const StageTrace& s) {
  json inst = json::array();
  for (const auto& i : s.instances)
    inst.push_back({{"id", i.id}, {"input_rows", i.input_rows}, {"input_bytes", i.input_bytes}});
  return {{"stage_id", s.stage_id},
          {"default_config", {{"cpu_cores", s.default_config.cpu_cores}, {"mem_gb", s.default_config.mem_gb}}},
          {"instances", std::move(inst)}};
}

inline json to_json(const ClusterTrace& c) {
  json machines = json::array();
  for (const auto& m : c.machines)
    machines.push_back({{"id", m.id},
                        {"hw_class", m.hw_class},
                        {"cpu_util", m.cpu_util},
                        {"mem_util", m.mem_util},
                        {"cpu_capacity", m.cpu_capacity},
                        {"mem_capacity", m.mem_capacity}});
  return {{"machines", std::move(machines)}};
}

inline std::vector<StageTrace> parse_stages(const json& doc) {
  if (!doc.is_array()) throw LoadError("stages: top level must be an array");
  std::vector<StageTrace> out;
  std::unordered_set<std::int64_t> seen_stages;
  for (std::size_t s = 0; s < doc.size(); ++s) {
    const std::string where = "stages[" + std::to_string(s) + "]";
    StageTrace st;
    st.stage_id = detail::field<std::int64_t>(doc[s], "stage_id", where);
    const std::string stage_ctx = where + " (stage " + std::to_string(st.stage_id) + ")";
    if (!seen_stages.insert(st.stage_id).second) throw LoadError(stage_ctx + ": duplicate stage_id");

    const auto cfg = detail::field<json>(doc[s], "default_config", stage_ctx);
    st.default_config.cpu_cores = detail::field<double>(cfg, "cpu_cores", stage_ctx + ".default_config");
    st.default_config.mem_gb = detail::field<double>(cfg, "mem_gb", stage_ctx + ".default_config");
    if (!(st.default_config.cpu_cores > 0.0 && st.default_config.mem_gb > 0.0))
      throw LoadError(stage_ctx + ".default_config: cpu_cores and mem_gb must be > 0");

    const auto instances = detail::field<json>(doc[s], "instances", stage_ctx);
    if (!instances.is_array() || instances.empty()) throw LoadError(stage_ctx + ".instances: need at least one instance");
    std::unordered_set<std::int64_t> seen;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const std::string ictx = stage_ctx + ".instances[" + std::to_string(i) + "]";
      InstanceSpec inst;
      inst.id = detail::field<std::int64_t>(instances[i], "id", ictx);
      inst.input_rows = detail::field<std::int64_t>(instances[i], "input_rows", ictx);
      inst.input_bytes = detail::field<std::int64_t>(instances[i], "input_bytes", ictx);
      if (inst.input_rows < 0)
        throw LoadError(ictx + ".input_rows: must be >= 0 (got " + std::to_string(inst.input_rows) + ")");
      if (inst.input_bytes < 0)
        throw LoadError(ictx + ".input_bytes: must be >= 0 (got " + std::to_string(inst.input_bytes) + ")");
      if (!seen.insert(inst.id).second) throw LoadError(ictx + ".id: duplicate instance id " + std::to_string(inst.id));
      st.instances.push_back(inst);
    }
    out.push_back(std::move(st));
  }
  return out;
}

inline ClusterTrace parse_machines(const json& doc) {
  const auto machines = detail::field<json>(doc, "machines", "machines file");
  if (!machines.is_array() || machines.empty()) throw LoadError("machines: need at least one machine");
  ClusterTrace out;
  std::unordered_set<std::int64_t> seen;
  for (std::size_t j = 0; j < machines.size(); ++j) {
    const std::string where = "machines[" + std::to_string(j) + "]";
    MachineSpec m;
    m.id = detail::field<std::int64_t>(machines[j], "id", where);
    m.hw_class = detail::field<std::string>(machines[j], "hw_class", where);
    m.cpu_util = detail::field<double>(machines[j], "cpu_util", where);
    m.mem_util = detail::field<double>(machines[j], "mem_util", where);
    m.cpu_capacity = detail::field<double>(machines[j], "cpu_capacity", where);
    m.mem_capacity = detail::field<double>(machines[j], "mem_capacity", where);
    try {
      validate(m);
    } catch (const ContractViolation& e) {
      throw LoadError(where + ": " + e.what());
    }
    if (!seen.insert(m.id).second) throw LoadError(where + ".id: duplicate machine id " + std::to_string(m.id));
    out.machines.push_back(std::move(m));
  }
  return out;
}

inline Traces load_traces(const std::filesystem::path& stages_path, const std::filesystem::path& machines_path) {
  Traces t;
  try {
    t.stages = parse_stages(detail::read_json_file(stages_path));
  } catch (const LoadError& e) {
    throw LoadError(stages_path.string() + ": " + e.what());
  }
  try {
    t.cluster = parse_machines(detail::read_json_file(machines_path));
  } catch (const LoadError& e) {
    throw LoadError(machines_path.string() + ": " + e.what());
  }
  return t;
}

inline void save_traces(const Traces& t, const std::filesystem::path& stages_path,
                        const std::filesystem::path& machines_path) {
  json stages = json::array();
  for (const auto& s : t.stages) stages.push_back(to_json(s));
  detail::write_text_file(stages_path, stages.dump(2) + "\n");
  detail::write_text_file(machines_path, to_json(t.cluster).dump(2) + "\n");
}

struct WorkloadParams {
  std::uint64_t seed = 1;
  std::size_t n_stages = 100;
  std::size_t m_min = 1;
  std::size_t m_max = 50;
  std::size_t n_machines = 200;
  double skew = 1.0;  // Zipf exponent over row bins; 0 = uniform
  std::size_t row_bins = 1000;
  std::int64_t rows_per_bin = 10000;
  std::int64_t bytes_per_row = 100;
  std::vector<std::string> hw_classes{"small", "medium", "large"};
  double cpu_capacity = 32.0;
  double mem_capacity = 128.0;
  ResourceConfig default_config{1.0, 4.0};
};

// Deterministic given params.seed.
inline Traces generate_workload(const WorkloadParams& p) {
  detail::require(p.m_min >= 1 && p.m_min <= p.m_max, "generate_workload: need 1 <= m_min <= m_max");
  detail::require(p.n_machines >= 1 && !p.hw_classes.empty(), "generate_workload: need machines and hw classes");
  detail::require(p.row_bins >= 1 && p.rows_per_bin >= 1 && p.skew >= 0.0, "generate_workload: bad row distribution");

  std::mt19937_64 rng(p.seed);
  Traces t;
  std::uniform_real_distribution<double> util(0.0, 1.0);
  for (std::size_t j = 0; j < p.n_machines; ++j) {
    MachineSpec m;
    m.id = static_cast<std::int64_t>(j);
    m.hw_class = p.hw_classes[j % p.hw_classes.size()];
    m.cpu_util = util(rng);
    m.mem_util = util(rng);
    m.cpu_capacity = p.cpu_capacity;
    m.mem_capacity = p.mem_capacity;
    t.cluster.machines.push_back(std::move(m));
  }

  std::vector<double> bin_weights(p.row_bins);
  for (std::size_t b = 0; b < p.row_bins; ++b) bin_weights[b] = std::pow(static_cast<double>(b + 1), -p.skew);
  std::discrete_distribution<std::size_t> bin(bin_weights.begin(), bin_weights.end());
  std::uniform_int_distribution<std::size_t> count(p.m_min, p.m_max);
  for (std::size_t s = 0; s < p.n_stages; ++s) {
    StageTrace st;
    st.stage_id = static_cast<std::int64_t>(s);
    st.default_config = p.default_config;
    const std::size_t m = count(rng);
    for (std::size_t i = 0; i < m; ++i) {
      InstanceSpec inst;
      inst.id = static_cast<std::int64_t>(i);
      inst.input_rows = static_cast<std::int64_t>(bin(rng) + 1) * p.rows_per_bin;
      inst.input_bytes = inst.input_rows * p.bytes_per_row;
      st.instances.push_back(inst);
    }
    t.stages.push_back(std::move(st));
  }
  return t;
}

}  // namespace stagesched

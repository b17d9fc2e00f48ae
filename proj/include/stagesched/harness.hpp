#pragma once

// End-to-end stage scheduling: placement, optional per-instance resource assignment,
// simulated execution, reports and the cross-mode comparison.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "json.hpp"
#include "stagesched/core_model.hpp"
#include "stagesched/errors.hpp"
#include "stagesched/instance_moo.hpp"
#include "stagesched/latency_model.hpp"
#include "stagesched/placement.hpp"
#include "stagesched/stage_moo.hpp"
#include "stagesched/traces.hpp"

namespace stagesched {

enum class Mode { Fuxi, Ipa, IpaClustered, IpaRaaGeneral, IpaRaaPath };

inline constexpr Mode kAllModes[] = {Mode::Fuxi, Mode::Ipa, Mode::IpaClustered, Mode::IpaRaaGeneral, Mode::IpaRaaPath};

inline std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Fuxi: return "fuxi";
    case Mode::Ipa: return "ipa";
    case Mode::IpaClustered: return "ipa-clustered";
    case Mode::IpaRaaGeneral: return "ipa-raa-general";
    case Mode::IpaRaaPath: return "ipa-raa-path";
  }
  return "unknown";
}

inline Mode parse_mode(const std::string& s) {
  for (Mode m : kAllModes)
    if (to_string(m) == s) return m;
  throw ConfigError("unknown mode '" + s + "' (expected fuxi|ipa|ipa-clustered|ipa-raa-general|ipa-raa-path)");
}

struct HarnessConfig {
  PredictorParams predictor;
  double min_latency = kDefaultMinLatency;
  int alpha = 2;
  KeyResource key_resource = KeyResource::Cpu;
  ClusterParams cluster;
  ConfigGrid grid;
  CostWeights cost_weights;
  std::vector<double> wun_weights{0.5, 0.5};
  std::optional<double> noise_sigma;  // unset = noise-free
  std::uint64_t seed = 0;
  double timeout_s = 60.0;

  void validate() const {
    predictor.validate();
    grid.validate();
    if (!(min_latency > 0.0)) throw ConfigError("min_latency must be > 0");
    if (alpha < 1) throw ConfigError("alpha must be >= 1");
    if (cluster.buckets < 1) throw ConfigError("buckets must be >= 1");
    if (wun_weights.size() != 2 || wun_weights[0] < 0.0 || wun_weights[1] < 0.0)
      throw ConfigError("wun_weights must be two non-negative numbers");
    if (noise_sigma) NoiseParams{*noise_sigma, seed}.validate();
    if (!(timeout_s > 0.0)) throw ConfigError("timeout_s must be > 0");
  }
};

// Overlay the keys present in `doc` onto `cfg`. Keys mirror the CLI flags.
inline void apply_config_json(HarnessConfig& cfg, const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  try {
    if (doc.contains("alpha")) cfg.alpha = doc.at("alpha").get<int>();
    if (doc.contains("buckets")) cfg.cluster.buckets = doc.at("buckets").get<int>();
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("noise_sigma")) {
      if (doc.at("noise_sigma").is_null())
        cfg.noise_sigma.reset();
      else
        cfg.noise_sigma = doc.at("noise_sigma").get<double>();
    }
    if (doc.contains("wun_weights")) cfg.wun_weights = doc.at("wun_weights").get<std::vector<double>>();
    if (doc.contains("min_latency")) cfg.min_latency = doc.at("min_latency").get<double>();
    if (doc.contains("timeout_s")) cfg.timeout_s = doc.at("timeout_s").get<double>();
    if (doc.contains("key_resource")) {
      const auto k = doc.at("key_resource").get<std::string>();
      if (k == "cpu")
        cfg.key_resource = KeyResource::Cpu;
      else if (k == "mem" || k == "memory")
        cfg.key_resource = KeyResource::Memory;
      else
        throw ConfigError("config: key_resource must be 'cpu' or 'mem'");
    }
    if (doc.contains("kde_bandwidth") && !doc.at("kde_bandwidth").is_null())
      cfg.cluster.kde.bandwidth = doc.at("kde_bandwidth").get<double>();
    if (doc.contains("kde_grid_points")) cfg.cluster.kde.grid_points = doc.at("kde_grid_points").get<std::size_t>();
    if (doc.contains("grid")) {
      const auto& g = doc.at("grid");
      cfg.grid.cpu_choices = g.at("cpu_choices").get<std::vector<double>>();
      cfg.grid.mem_choices = g.at("mem_choices").get<std::vector<double>>();
    }
    if (doc.contains("cost_weights")) {
      const auto& w = doc.at("cost_weights");
      cfg.cost_weights.cpu = w.value("cpu", cfg.cost_weights.cpu);
      cfg.cost_weights.mem = w.value("mem", cfg.cost_weights.mem);
    }
    if (doc.contains("predictor")) {
      const auto& p = doc.at("predictor");
      auto& pr = cfg.predictor;
      pr.base_seconds_per_row = p.value("base_seconds_per_row", pr.base_seconds_per_row);
      pr.contention_coeff = p.value("contention_coeff", pr.contention_coeff);
      pr.cpu_exponent = p.value("cpu_exponent", pr.cpu_exponent);
      pr.mem_floor_gb = p.value("mem_floor_gb", pr.mem_floor_gb);
      pr.mem_penalty = p.value("mem_penalty", pr.mem_penalty);
      if (p.contains("hw_speed")) pr.hw_speed = p.at("hw_speed").get<std::map<std::string, double>>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

inline ConfigGrid load_grid(const std::filesystem::path& path) {
  const auto doc = detail::read_json_file(path);
  ConfigGrid g;
  try {
    g.cpu_choices = doc.at("cpu_choices").get<std::vector<double>>();
    g.mem_choices = doc.at("mem_choices").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  g.validate();
  return g;
}

struct InstanceReport {
  std::int64_t instance_id = 0;
  std::int64_t machine_id = 0;
  ResourceConfig config;
  double predicted_latency_s = 0.0;
  double latency_s = 0.0;  // actual (noisy) when noise is on, else predicted
  double cost = 0.0;
};

struct StageReport {
  std::int64_t stage_id = 0;
  Mode mode = Mode::Fuxi;
  double stage_latency_s = 0.0;
  double stage_cost = 0.0;
  double solve_time_ms = 0.0;
  bool grid_restricted = false;
  bool timed_out = false;
  std::vector<InstanceReport> instances;

  // Latency including the scheduler's own solving time.
  double stage_latency_in_s() const { return stage_latency_s + solve_time_ms / 1000.0; }
};

inline double recompute_stage_latency(const StageReport& r) {
  double worst = 0.0;
  for (const auto& i : r.instances) worst = std::max(worst, i.latency_s);
  return worst;
}

inline double recompute_stage_cost(const StageReport& r, const CostWeights& w) {
  double total = 0.0;
  for (const auto& i : r.instances) total += cost_of(i.latency_s, i.config, w);
  return total;
}

namespace detail {

inline int effective_alpha(int alpha, std::size_t m, std::size_t n) {
  const auto floor_alpha = static_cast<int>((m + n - 1) / n);
  return std::max(alpha, floor_alpha);
}

struct ResourcePlan {
  std::vector<ResourceConfig> configs;
  bool grid_restricted = false;
};

// Per-instance Pareto sets on the assigned machine (grid limited to an equal share of
// the machine's free capacity, plus the default config), composed into the stage set,
// then one point recommended by WUN.
inline ResourcePlan assign_resources(std::span<const InstanceSpec> instances, std::span<const MachineSpec> machines,
                                     const PlacementPlan& plan, const ResourceConfig& default_cfg, Mode mode,
                                     const HarnessConfig& cfg) {
  std::vector<int> colocated(machines.size(), 0);
  for (std::size_t j : plan.machine_of) ++colocated[j];

  const auto model = latency_cost_model(cfg.predictor, cfg.cost_weights, cfg.min_latency);
  const std::size_t full_grid = cfg.grid.cpu_choices.size() * cfg.grid.mem_choices.size();
  ResourcePlan out;
  std::vector<ParetoSet> sets;
  HierarchicalProblem problem;
  problem.agg = AggregatorSpec{Aggregator::Max, Aggregator::Sum};
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& mach = machines[plan.machine_of[i]];
    const double share = static_cast<double>(colocated[plan.machine_of[i]]);
    const ResourceConfig limit{mach.free_cpu() / share, mach.free_mem() / share};
    auto candidates = cfg.grid.configs_within(limit);
    if (candidates.size() < full_grid) out.grid_restricted = true;
    if (std::find(candidates.begin(), candidates.end(), default_cfg) == candidates.end())
      candidates.push_back(default_cfg);
    sets.push_back(instance_pareto(instances[i], mach, candidates, model));
    std::vector<ObjectiveVector> objs;
    for (const auto& p : sets.back()) objs.push_back(p.objectives);
    problem.instances.push_back(std::move(objs));
  }

  State chosen;
  if (mode == Mode::IpaRaaPath) {
    const auto path = raa_path(problem);
    chosen = path.state(wun_recommend(path.all_objectives(), cfg.wun_weights));
  } else {
    const auto points = general_hierarchical_moo(problem);
    std::vector<ObjectiveVector> objs;
    for (const auto& p : points) objs.push_back(p.objectives);
    chosen = points[wun_recommend(objs, cfg.wun_weights)].state;
  }
  for (std::size_t i = 0; i < instances.size(); ++i) out.configs.push_back(sets[i][chosen.choice[i]].tag);
  return out;
}

}  // namespace detail

// Noise stream for a stage: independent of worker scheduling.
inline NoiseParams stage_noise(const HarnessConfig& cfg, std::int64_t stage_id) {
  return NoiseParams{cfg.noise_sigma.value_or(0.0),
                     detail::splitmix64(cfg.seed ^ detail::splitmix64(static_cast<std::uint64_t>(stage_id)))};
}

inline StageReport run_stage(const StageTrace& stage, const ClusterTrace& cluster, Mode mode, const HarnessConfig& cfg) {
  std::vector<InstanceSpec> instances = stage.instances;
  std::sort(instances.begin(), instances.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  validate_unique_ids(instances);
  detail::require(!instances.empty(), "stage " + std::to_string(stage.stage_id) + ": no instances");
  detail::require(!cluster.machines.empty(), "cluster has no machines");
  validate(stage.default_config);
  const auto& machines = cluster.machines;

  const auto start = std::chrono::steady_clock::now();
  const CapacityPolicy policy{detail::effective_alpha(cfg.alpha, instances.size(), machines.size()),
                              stage.default_config};
  PlacementPlan plan;
  std::vector<ResourceConfig> configs(instances.size(), stage.default_config);
  bool restricted = false;
  try {
    if (mode == Mode::IpaClustered) {
      plan = ipa_place_clustered(instances, machines, policy, cfg.cluster, cfg.predictor, cfg.min_latency);
    } else {
      const auto beta = compute_beta(machines, policy);
      const auto latencies = build_latency_matrix(instances, stage.default_config, machines, cfg.predictor,
                                                  cfg.min_latency);
      plan = mode == Mode::Fuxi ? fuxi_place(latencies, machines, beta, cfg.key_resource) : ipa_place(latencies, beta);
    }
    if (mode == Mode::IpaRaaGeneral || mode == Mode::IpaRaaPath) {
      auto rp = detail::assign_resources(instances, machines, plan, stage.default_config, mode, cfg);
      configs = std::move(rp.configs);
      restricted = rp.grid_restricted;
    }
  } catch (const NoSolution& e) {
    throw NoSolution("stage " + std::to_string(stage.stage_id) + ": " + e.what());
  }
  const double solve_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  StageReport report;
  report.stage_id = stage.stage_id;
  report.mode = mode;
  report.solve_time_ms = solve_ms;
  report.timed_out = solve_ms > cfg.timeout_s * 1000.0;
  report.grid_restricted = restricted;
  NoiseSampler noise(stage_noise(cfg, stage.stage_id));
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& mach = machines[plan.machine_of[i]];
    InstanceReport ir;
    ir.instance_id = instances[i].id;
    ir.machine_id = mach.id;
    ir.config = configs[i];
    ir.predicted_latency_s = std::max(cfg.min_latency, predict(instances[i], configs[i], mach, cfg.predictor));
    ir.latency_s = cfg.noise_sigma ? noise(ir.predicted_latency_s) : ir.predicted_latency_s;
    ir.cost = cost_of(ir.latency_s, ir.config, cfg.cost_weights);
    report.instances.push_back(ir);
  }
  report.stage_latency_s = recompute_stage_latency(report);
  report.stage_cost = recompute_stage_cost(report, cfg.cost_weights);
  return report;
}

struct StageFailure {
  std::int64_t stage_id = 0;
  std::string error;
};

struct WorkloadResult {
  Mode mode = Mode::Fuxi;
  std::vector<StageReport> reports;  // in input stage order
  std::vector<StageFailure> failures;
};

// Solves stages on `threads` workers; results are assembled in input order so the
// output does not depend on scheduling.
inline WorkloadResult run_workload(const Traces& traces, Mode mode, const HarnessConfig& cfg, unsigned threads = 1) {
  cfg.validate();
  const std::size_t n = traces.stages.size();
  std::vector<std::variant<std::monostate, StageReport, StageFailure>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t s; (s = next.fetch_add(1)) < n;) {
      try {
        slots[s] = run_stage(traces.stages[s], traces.cluster, mode, cfg);
      } catch (const NoSolution& e) {
        slots[s] = StageFailure{traces.stages[s].stage_id, e.what()};
      } catch (...) {
        errors[s] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  WorkloadResult out;
  out.mode = mode;
  for (auto& slot : slots) {
    if (auto* r = std::get_if<StageReport>(&slot)) out.reports.push_back(std::move(*r));
    if (auto* f = std::get_if<StageFailure>(&slot)) out.failures.push_back(std::move(*f));
  }
  return out;
}

inline json to_json(const StageReport& r, bool timing) {
  json inst = json::array();
  for (const auto& i : r.instances)
    inst.push_back({{"id", i.instance_id},
                    {"machine_id", i.machine_id},
                    {"cpu_cores", i.config.cpu_cores},
                    {"mem_gb", i.config.mem_gb},
                    {"predicted_latency_s", i.predicted_latency_s},
                    {"latency_s", i.latency_s},
                    {"cost", i.cost}});
  json out = {{"stage_id", r.stage_id},
              {"mode", to_string(r.mode)},
              {"stage_latency_s", r.stage_latency_s},
              {"stage_cost", r.stage_cost},
              {"grid_restricted", r.grid_restricted},
              {"instances", std::move(inst)}};
  if (timing) {
    out["solve_time_ms"] = r.solve_time_ms;
    out["stage_latency_in_s"] = r.stage_latency_in_s();
    out["timed_out"] = r.timed_out;
  }
  return out;
}

inline json to_json(const WorkloadResult& w, bool timing) {
  json stages = json::array();
  for (const auto& r : w.reports) stages.push_back(to_json(r, timing));
  json failed = json::array();
  for (const auto& f : w.failures) failed.push_back({{"stage_id", f.stage_id}, {"error", f.error}});
  return {{"mode", to_string(w.mode)}, {"stages", std::move(stages)}, {"failed_stages", std::move(failed)}};
}

struct ModeSummary {
  Mode mode = Mode::Fuxi;
  std::size_t stages = 0;
  double mean_latency_s = 0.0;
  double mean_latency_in_s = 0.0;
  double mean_cost = 0.0;
  double mean_solve_ms = 0.0;
  double max_solve_ms = 0.0;
  double latency_reduction_rate = 0.0;  // 1 - mean(mode) / mean(fuxi)
  double cost_reduction_rate = 0.0;
  double dominates_fuxi_fraction = 0.0;  // latency <= fuxi and cost <= fuxi
};

struct ComparisonSummary {
  std::vector<ModeSummary> modes;
};

// Per-mode means and reduction rates against the fuxi baseline. Every mode must
// cover exactly the stage set of the baseline.
inline ComparisonSummary compare_report(const std::map<Mode, std::vector<StageReport>>& reports) {
  auto fuxi_it = reports.find(Mode::Fuxi);
  detail::require(fuxi_it != reports.end(), "compare_report: the fuxi baseline is required");
  std::map<std::int64_t, const StageReport*> baseline;
  for (const auto& r : fuxi_it->second) baseline[r.stage_id] = &r;
  detail::require(baseline.size() == fuxi_it->second.size(), "compare_report: duplicate stage ids in baseline");

  auto mean = [](double total, std::size_t n) { return n == 0 ? 0.0 : total / static_cast<double>(n); };
  ComparisonSummary out;
  double fuxi_lat = 0.0, fuxi_cost = 0.0;
  for (const auto& r : fuxi_it->second) {
    fuxi_lat += r.stage_latency_s;
    fuxi_cost += r.stage_cost;
  }
  fuxi_lat = mean(fuxi_lat, baseline.size());
  fuxi_cost = mean(fuxi_cost, baseline.size());

  for (const auto& [mode, list] : reports) {
    detail::require(list.size() == baseline.size(), "compare_report: mode " + to_string(mode) +
                                                         " covers a different stage set than fuxi");
    ModeSummary s;
    s.mode = mode;
    s.stages = list.size();
    double lat = 0.0, lat_in = 0.0, cost = 0.0, solve = 0.0;
    std::size_t dominating = 0;
    for (const auto& r : list) {
      auto b = baseline.find(r.stage_id);
      detail::require(b != baseline.end(), "compare_report: stage " + std::to_string(r.stage_id) +
                                               " missing from the fuxi baseline");
      lat += r.stage_latency_s;
      lat_in += r.stage_latency_in_s();
      cost += r.stage_cost;
      solve += r.solve_time_ms;
      s.max_solve_ms = std::max(s.max_solve_ms, r.solve_time_ms);
      if (r.stage_latency_s <= b->second->stage_latency_s && r.stage_cost <= b->second->stage_cost) ++dominating;
    }
    s.mean_latency_s = mean(lat, s.stages);
    s.mean_latency_in_s = mean(lat_in, s.stages);
    s.mean_cost = mean(cost, s.stages);
    s.mean_solve_ms = mean(solve, s.stages);
    s.latency_reduction_rate = fuxi_lat > 0.0 ? 1.0 - s.mean_latency_s / fuxi_lat : 0.0;
    s.cost_reduction_rate = fuxi_cost > 0.0 ? 1.0 - s.mean_cost / fuxi_cost : 0.0;
    s.dominates_fuxi_fraction = s.stages == 0 ? 0.0 : static_cast<double>(dominating) / static_cast<double>(s.stages);
    out.modes.push_back(s);
  }
  return out;
}

inline json to_json(const ComparisonSummary& c) {
  json modes = json::array();
  for (const auto& s : c.modes)
    modes.push_back({{"mode", to_string(s.mode)},
                     {"stages", s.stages},
                     {"mean_latency_s", s.mean_latency_s},
                     {"mean_latency_in_s", s.mean_latency_in_s},
                     {"mean_cost", s.mean_cost},
                     {"mean_solve_ms", s.mean_solve_ms},
                     {"max_solve_ms", s.max_solve_ms},
                     {"latency_reduction_rate", s.latency_reduction_rate},
                     {"cost_reduction_rate", s.cost_reduction_rate},
                     {"dominates_fuxi_fraction", s.dominates_fuxi_fraction}});
  return {{"modes", std::move(modes)}};
}

inline std::string to_csv(const ComparisonSummary& c) {
  std::ostringstream out;
  out << "mode,stages,mean_latency_s,mean_latency_in_s,mean_cost,mean_solve_ms,max_solve_ms,"
         "latency_reduction_rate,cost_reduction_rate,dominates_fuxi_fraction\n";
  out << std::setprecision(10);
  for (const auto& s : c.modes) {
    out << to_string(s.mode) << ',' << s.stages << ',' << s.mean_latency_s << ',' << s.mean_latency_in_s << ','
        << s.mean_cost << ',' << s.mean_solve_ms << ',' << s.max_solve_ms << ',' << s.latency_reduction_rate << ','
        << s.cost_reduction_rate << ',' << s.dominates_fuxi_fraction << '\n';
  }
  return out.str();
}

}  // namespace stagesched

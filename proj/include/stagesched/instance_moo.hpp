#pragma once

// Per-instance Pareto sets over a discrete CPU x memory configuration grid.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "stagesched/core_model.hpp"
#include "stagesched/errors.hpp"
#include "stagesched/latency_model.hpp"

namespace stagesched {

struct ConfigGrid {
  std::vector<double> cpu_choices{0.5, 1.0, 2.0, 4.0};
  std::vector<double> mem_choices{1.0, 2.0, 4.0, 8.0, 12.0};

  void validate() const {
    auto check = [](const std::vector<double>& v, const char* name) {
      if (v.empty()) throw ConfigError(std::string("grid: ") + name + " is empty");
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) throw ConfigError(std::string("grid: ") + name + " must be positive");
        if (i > 0 && !(v[i] > v[i - 1])) throw ConfigError(std::string("grid: ") + name + " must be strictly increasing");
      }
    };
    check(cpu_choices, "cpu_choices");
    check(mem_choices, "mem_choices");
  }

  std::vector<ResourceConfig> configs() const {
    std::vector<ResourceConfig> out;
    out.reserve(cpu_choices.size() * mem_choices.size());
    for (double c : cpu_choices)
      for (double m : mem_choices) out.push_back({c, m});
    return out;
  }

  // Grid points fitting inside `limit` (componentwise).
  std::vector<ResourceConfig> configs_within(const ResourceConfig& limit) const {
    std::vector<ResourceConfig> out;
    for (const auto& cfg : configs())
      if (cfg.cpu_cores <= limit.cpu_cores && cfg.mem_gb <= limit.mem_gb) out.push_back(cfg);
    return out;
  }
};

struct CostWeights {
  double cpu = 1.0;   // per core-hour
  double mem = 0.25;  // per GB-hour
};

// Resource-hours charged for holding `cfg` for `latency` seconds.
inline double cost_of(double latency, const ResourceConfig& cfg, const CostWeights& w) {
  detail::require(latency >= 0.0, "cost_of: latency must be >= 0");
  return latency / 3600.0 * (w.cpu * cfg.cpu_cores + w.mem * cfg.mem_gb);
}

using ObjectiveFn = std::function<double(const InstanceSpec&, const ResourceConfig&, const MachineSpec&)>;

struct ObjectiveModel {
  std::vector<ObjectiveFn> objectives;

  std::size_t k() const { return objectives.size(); }

  ObjectiveVector evaluate(const InstanceSpec& inst, const ResourceConfig& cfg, const MachineSpec& mach) const {
    std::vector<double> v;
    v.reserve(objectives.size());
    for (const auto& f : objectives) v.push_back(f(inst, cfg, mach));
    return ObjectiveVector(std::move(v));
  }
};

// Objective 0: predicted latency (clamped); objective 1: its resource cost.
inline ObjectiveModel latency_cost_model(PredictorParams predictor, CostWeights weights,
                                         double min_latency = kDefaultMinLatency) {
  auto latency = [predictor, min_latency](const InstanceSpec& i, const ResourceConfig& c, const MachineSpec& m) {
    return std::max(min_latency, predict(i, c, m, predictor));
  };
  auto cost = [latency, weights](const InstanceSpec& i, const ResourceConfig& c, const MachineSpec& m) {
    return cost_of(latency(i, c, m), c, weights);
  };
  return ObjectiveModel{{latency, cost}};
}

// Exhaustive evaluation of the candidate configs followed by dominance filtering.
inline ParetoSet instance_pareto(const InstanceSpec& inst, const MachineSpec& mach,
                                 std::span<const ResourceConfig> candidates, const ObjectiveModel& model) {
  detail::require(!candidates.empty(), "instance_pareto: no candidate configurations");
  detail::require(model.k() >= 1, "instance_pareto: objective model is empty");
  std::vector<ParetoPoint> points;
  points.reserve(candidates.size());
  for (const auto& cfg : candidates) points.push_back({cfg, model.evaluate(inst, cfg, mach)});
  return pareto_filter(std::move(points));
}

inline ParetoSet instance_pareto(const InstanceSpec& inst, const MachineSpec& mach, const ConfigGrid& grid,
                                 const ObjectiveModel& model) {
  grid.validate();
  const auto configs = grid.configs();
  return instance_pareto(inst, mach, configs, model);
}

}  // namespace stagesched

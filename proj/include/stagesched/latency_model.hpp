#pragma once

// Analytic instance-latency predictor and the truncated-Gaussian noise used by the simulator.
//
// The predictor factors into (instance, config) x (machine) terms, so every column of the
// resulting latency matrix ranks instances identically (column order holds by construction).

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "stagesched/core_model.hpp"
#include "stagesched/errors.hpp"

namespace stagesched {

struct PredictorParams {
  double base_seconds_per_row = 1e-5;
  std::map<std::string, double> hw_speed{{"small", 0.8}, {"medium", 1.0}, {"large", 1.25}};
  double contention_coeff = 1.0;  // gamma
  double cpu_exponent = 0.8;      // delta, in (0,1]
  double mem_floor_gb = 4.0;
  double mem_penalty = 0.5;

  void validate() const {
    if (!(base_seconds_per_row > 0.0)) throw ConfigError("predictor: base_seconds_per_row must be > 0");
    if (!(contention_coeff >= 0.0)) throw ConfigError("predictor: contention_coeff must be >= 0");
    if (!(cpu_exponent > 0.0 && cpu_exponent <= 1.0)) throw ConfigError("predictor: cpu_exponent must be in (0,1]");
    if (!(mem_floor_gb > 0.0)) throw ConfigError("predictor: mem_floor_gb must be > 0");
    if (!(mem_penalty >= 0.0)) throw ConfigError("predictor: mem_penalty must be >= 0");
    for (const auto& [cls, speed] : hw_speed) {
      if (!(speed > 0.0)) throw ConfigError("predictor: hw_speed for '" + cls + "' must be > 0");
    }
  }
};

struct NoiseParams {
  double sigma_fraction = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(sigma_fraction >= 0.0 && sigma_fraction < 1.0 / 3.0))
      throw ConfigError("noise: sigma_fraction must be in [0, 1/3)");
  }
};

inline constexpr double kDefaultMinLatency = 0.001;

// Seconds per unit of work contributed by the instance and its resource config.
inline double instance_factor(const InstanceSpec& inst, const ResourceConfig& cfg, const PredictorParams& p) {
  const double mem_short = std::max(0.0, p.mem_floor_gb - cfg.mem_gb) / p.mem_floor_gb;
  return p.base_seconds_per_row * static_cast<double>(inst.input_rows) / std::pow(cfg.cpu_cores, p.cpu_exponent) *
         (1.0 + p.mem_penalty * mem_short);
}

// Slowdown contributed by the machine: hardware speed and CPU contention.
inline double machine_factor(const MachineSpec& mach, const PredictorParams& p) {
  auto it = p.hw_speed.find(mach.hw_class);
  if (it == p.hw_speed.end()) throw ConfigError("predictor: unknown hw_class '" + mach.hw_class + "'");
  return (1.0 + p.contention_coeff * mach.cpu_util) / it->second;
}

inline double predict(const InstanceSpec& inst, const ResourceConfig& cfg, const MachineSpec& mach,
                      const PredictorParams& params) {
  return instance_factor(inst, cfg, params) * machine_factor(mach, params);
}

inline LatencyMatrix build_latency_matrix(std::span<const InstanceSpec> instances, const ResourceConfig& default_cfg,
                                          std::span<const MachineSpec> machines, const PredictorParams& params,
                                          double min_latency = kDefaultMinLatency) {
  detail::require(!instances.empty() && !machines.empty(), "build_latency_matrix: need m >= 1 and n >= 1");
  detail::require(min_latency > 0.0, "build_latency_matrix: min_latency must be > 0");
  std::vector<double> mf(machines.size());
  for (std::size_t j = 0; j < machines.size(); ++j) mf[j] = machine_factor(machines[j], params);

  std::vector<double> values;
  values.reserve(instances.size() * machines.size());
  for (const auto& inst : instances) {
    const double f = instance_factor(inst, default_cfg, params);
    for (double m : mf) values.push_back(std::max(min_latency, f * m));
  }
  return LatencyMatrix(instances.size(), machines.size(), std::move(values));
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Draw from N(predicted, sigma_fraction * predicted), redrawn until inside mu +/- 3 sigma.
// The draw is a pure function of (seed, draw_index).
inline double sample_actual(double predicted, const NoiseParams& noise, std::uint64_t draw_index) {
  detail::require(predicted > 0.0, "sample_actual: predicted latency must be > 0");
  noise.validate();
  if (noise.sigma_fraction == 0.0) return predicted;

  const double sigma = noise.sigma_fraction * predicted;
  std::mt19937_64 rng(detail::splitmix64(noise.seed ^ detail::splitmix64(draw_index)));
  std::normal_distribution<double> normal(predicted, sigma);
  for (;;) {
    const double x = normal(rng);
    if (std::abs(x - predicted) <= 3.0 * sigma) return x;
  }
}

// Sequential stream of noisy samples; one per worker, never shared.
class NoiseSampler {
 public:
  explicit NoiseSampler(NoiseParams params) : params_(params) { params_.validate(); }

  double operator()(double predicted) { return sample_actual(predicted, params_, next_++); }
  std::uint64_t draws() const { return next_; }

 private:
  NoiseParams params_;
  std::uint64_t next_ = 0;
};

}  // namespace stagesched

#pragma once

// Domain types shared by the placement and resource-assignment solvers.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "stagesched/errors.hpp"

namespace stagesched {

struct InstanceSpec {
  std::int64_t id = 0;
  std::int64_t input_rows = 0;
  std::int64_t input_bytes = 0;

  friend bool operator==(const InstanceSpec&, const InstanceSpec&) = default;
};

struct MachineSpec {
  std::int64_t id = 0;
  std::string hw_class;
  double cpu_util = 0.0;  // fraction in [0,1]
  double mem_util = 0.0;  // fraction in [0,1]
  double cpu_capacity = 1.0;  // cores
  double mem_capacity = 1.0;  // GB

  double free_cpu() const { return cpu_capacity * (1.0 - cpu_util); }
  double free_mem() const { return mem_capacity * (1.0 - mem_util); }

  friend bool operator==(const MachineSpec&, const MachineSpec&) = default;
};

// CPU + memory granted to one instance container.
struct ResourceConfig {
  double cpu_cores = 1.0;
  double mem_gb = 1.0;

  friend auto operator<=>(const ResourceConfig&, const ResourceConfig&) = default;
};

inline void validate(const InstanceSpec& inst) {
  detail::require(inst.input_rows >= 0, "instance " + std::to_string(inst.id) + ": input_rows must be >= 0");
  detail::require(inst.input_bytes >= 0, "instance " + std::to_string(inst.id) + ": input_bytes must be >= 0");
}

inline void validate(const MachineSpec& m) {
  const auto id = std::to_string(m.id);
  detail::require(m.cpu_util >= 0.0 && m.cpu_util <= 1.0, "machine " + id + ": cpu_util outside [0,1]");
  detail::require(m.mem_util >= 0.0 && m.mem_util <= 1.0, "machine " + id + ": mem_util outside [0,1]");
  detail::require(m.cpu_capacity > 0.0, "machine " + id + ": cpu_capacity must be > 0");
  detail::require(m.mem_capacity > 0.0, "machine " + id + ": mem_capacity must be > 0");
}

inline void validate(const ResourceConfig& c) {
  detail::require(c.cpu_cores > 0.0 && c.mem_gb > 0.0, "resource config must be strictly positive");
}

inline void validate_unique_ids(std::span<const InstanceSpec> instances) {
  std::unordered_set<std::int64_t> seen;
  for (const auto& inst : instances) {
    validate(inst);
    detail::require(seen.insert(inst.id).second, "duplicate instance id " + std::to_string(inst.id));
  }
}

// Dense row-major m x n matrix of predicted latencies (rows = instances, cols = machines).
class LatencyMatrix {
 public:
  LatencyMatrix() = default;
  LatencyMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    detail::require(values_.size() == rows_ * cols_, "latency matrix: value count does not match dimensions");
    for (double v : values_) {
      detail::require(std::isfinite(v) && v > 0.0, "latency matrix entries must be finite and > 0");
    }
  }
  LatencyMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    for (const auto& r : rows) {
      detail::require(r.size() == cols_, "latency matrix: ragged rows");
      values_.insert(values_.end(), r.begin(), r.end());
    }
    *this = LatencyMatrix(rows_, cols_, std::move(values_));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double at(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

// Assignment B: machine index for every instance index (exactly one machine per instance).
struct PlacementPlan {
  std::vector<std::size_t> machine_of;

  std::size_t size() const { return machine_of.size(); }
  std::vector<std::pair<std::size_t, std::size_t>> pairs() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    out.reserve(machine_of.size());
    for (std::size_t i = 0; i < machine_of.size(); ++i) out.emplace_back(i, machine_of[i]);
    return out;
  }

  friend bool operator==(const PlacementPlan&, const PlacementPlan&) = default;
};

// Max assigned latency of a plan.
inline double stage_latency(const PlacementPlan& plan, const LatencyMatrix& latencies) {
  detail::require(plan.size() == latencies.rows(), "plan size does not match latency matrix rows");
  double worst = 0.0;
  for (std::size_t i = 0; i < plan.size(); ++i) worst = std::max(worst, latencies.at(i, plan.machine_of[i]));
  return worst;
}

// Per-machine count <= beta and every instance placed on a valid machine.
inline bool respects_capacity(const PlacementPlan& plan, std::span<const int> beta) {
  std::vector<int> used(beta.size(), 0);
  for (std::size_t j : plan.machine_of) {
    if (j >= beta.size()) return false;
    if (++used[j] > beta[j]) return false;
  }
  return true;
}

// k objective values; index 0 is latency by convention.
struct ObjectiveVector {
  std::vector<double> values;

  ObjectiveVector() = default;
  explicit ObjectiveVector(std::vector<double> v) : values(std::move(v)) {}
  ObjectiveVector(std::initializer_list<double> v) : values(v) {}

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  friend bool operator==(const ObjectiveVector&, const ObjectiveVector&) = default;
  friend auto operator<=>(const ObjectiveVector& a, const ObjectiveVector& b) {
    return std::lexicographical_compare_three_way(a.values.begin(), a.values.end(), b.values.begin(),
                                                  b.values.end(), std::compare_three_way{});
  }
};

// Pareto dominance for minimisation. Exact comparison, no epsilon.
inline bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  detail::require(a.size() == b.size(), "dominates: objective dimension mismatch");
  bool strictly_better = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly_better = true;
  }
  return strictly_better;
}

inline bool weakly_dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  detail::require(a.size() == b.size(), "weakly_dominates: objective dimension mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
  }
  return true;
}

template <class Tag>
struct Tagged {
  Tag tag;
  ObjectiveVector objectives;

  friend bool operator==(const Tagged&, const Tagged&) = default;
};

// Non-dominated subset of `points`. Identical vectors collapse onto the lowest tag.
// Output ordering: descending objective 0, then ascending on the remaining objectives;
// for k=2 this is strictly descending latency and strictly ascending cost.
template <class Tag>
std::vector<Tagged<Tag>> pareto_filter(std::vector<Tagged<Tag>> points) {
  if (points.empty()) return points;
  const std::size_t k = points.front().objectives.size();
  for (const auto& p : points) detail::require(p.objectives.size() == k, "pareto_filter: mixed objective dimensions");

  // Anything that dominates a point is lexicographically smaller, so a single
  // pass in lexicographic order only needs to compare against survivors.
  std::sort(points.begin(), points.end(), [](const Tagged<Tag>& a, const Tagged<Tag>& b) {
    if (auto c = a.objectives <=> b.objectives; c != 0) return c < 0;
    return a.tag < b.tag;
  });

  std::vector<Tagged<Tag>> front;
  for (auto& p : points) {
    if (!front.empty() && front.back().objectives == p.objectives) continue;
    bool dominated = false;
    for (const auto& f : front) {
      if (dominates(f.objectives, p.objectives)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) front.push_back(std::move(p));
  }

  std::sort(front.begin(), front.end(), [](const Tagged<Tag>& a, const Tagged<Tag>& b) {
    if (a.objectives[0] != b.objectives[0]) return a.objectives[0] > b.objectives[0];
    return a.objectives < b.objectives;
  });
  return front;
}

using ParetoPoint = Tagged<ResourceConfig>;
using ParetoSet = std::vector<ParetoPoint>;

enum class Aggregator { Max, Sum };

// Per-objective lifting from instance level to stage level.
struct AggregatorSpec {
  std::vector<Aggregator> tags;

  AggregatorSpec() = default;
  explicit AggregatorSpec(std::vector<Aggregator> t) : tags(std::move(t)) {}
  AggregatorSpec(std::initializer_list<Aggregator> t) : tags(t) {}

  std::size_t k() const { return tags.size(); }
  std::size_t k1() const { return static_cast<std::size_t>(std::count(tags.begin(), tags.end(), Aggregator::Max)); }
  std::size_t k2() const { return k() - k1(); }

  std::vector<std::size_t> indices_of(Aggregator a) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < tags.size(); ++i)
      if (tags[i] == a) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> max_indices() const { return indices_of(Aggregator::Max); }
  std::vector<std::size_t> sum_indices() const { return indices_of(Aggregator::Sum); }

  friend bool operator==(const AggregatorSpec&, const AggregatorSpec&) = default;
};

// One chosen Pareto index per instance (0-based).
struct State {
  std::vector<std::size_t> choice;

  friend bool operator==(const State&, const State&) = default;
  friend auto operator<=>(const State& a, const State& b) {
    return std::lexicographical_compare_three_way(a.choice.begin(), a.choice.end(), b.choice.begin(),
                                                  b.choice.end(), std::compare_three_way{});
  }
};

// Stage-level resource plan: one config per instance plus its aggregated objectives.
struct StageSolution {
  std::vector<ResourceConfig> configs;
  ObjectiveVector objectives;
};

}  // namespace stagesched

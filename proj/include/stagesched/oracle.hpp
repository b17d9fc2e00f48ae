#pragma once

// Exhaustive reference solvers for small instances. Used by property tests and the
// oracle-check CLI; deliberately independent of the greedy and path solvers.

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "stagesched/core_model.hpp"
#include "stagesched/errors.hpp"
#include "stagesched/stage_moo.hpp"

namespace stagesched::oracle {

inline constexpr std::size_t kMaxPlacementInstances = 9;
inline constexpr std::size_t kMaxPlacementMachines = 10;
inline constexpr double kMaxStageStates = 1e6;

struct PlacementOptimum {
  PlacementPlan plan;
  double max_latency = 0.0;
};

// Minimum achievable max latency over every assignment respecting beta. Depth-first in
// lexicographic order (instance 0 first, machines ascending) with sound pruning, so the
// first optimum met is the lexicographically smallest one.
inline PlacementOptimum brute_force_placement(const LatencyMatrix& latencies, std::span<const int> beta) {
  const std::size_t m = latencies.rows();
  const std::size_t n = latencies.cols();
  if (m > kMaxPlacementInstances || n > kMaxPlacementMachines)
    throw ContractViolation("brute_force_placement: refused, problem exceeds 9x10 search guard");
  detail::require(beta.size() == n, "brute_force_placement: beta size does not match machine count");

  std::vector<int> slots(beta.begin(), beta.end());
  std::vector<std::size_t> current(m, 0);
  std::vector<std::size_t> best_plan;
  double best = std::numeric_limits<double>::infinity();

  auto search = [&](auto&& self, std::size_t i, double running_max) -> void {
    if (i == m) {
      if (running_max < best) {
        best = running_max;
        best_plan = current;
      }
      return;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (slots[j] <= 0) continue;
      const double next = std::max(running_max, latencies.at(i, j));
      if (next >= best) continue;
      --slots[j];
      current[i] = j;
      self(self, i + 1, next);
      ++slots[j];
    }
  };
  search(search, 0, 0.0);

  if (best_plan.size() != m || (m > 0 && best == std::numeric_limits<double>::infinity()))
    throw NoSolution("brute_force_placement: no feasible assignment");
  return {PlacementPlan{std::move(best_plan)}, m == 0 ? 0.0 : best};
}

// Every state of the product space with its aggregated objectives, in lexicographic state order.
inline std::vector<StagePoint> brute_force_all_states(std::span<const std::vector<ObjectiveVector>> pareto_sets,
                                                      const AggregatorSpec& agg) {
  detail::require(!pareto_sets.empty(), "brute_force_all_states: no instances");
  double states = 1.0;
  for (const auto& s : pareto_sets) {
    detail::require(!s.empty(), "brute_force_all_states: empty instance Pareto set");
    states *= static_cast<double>(s.size());
  }
  if (states > kMaxStageStates) throw ContractViolation("brute_force_stage_pareto: refused, more than 1e6 states");

  const std::size_t m = pareto_sets.size();
  std::vector<StagePoint> all;
  all.reserve(static_cast<std::size_t>(states));
  State s;
  s.choice.assign(m, 0);
  std::vector<ObjectiveVector> picked(m);
  for (bool done = false; !done;) {
    for (std::size_t i = 0; i < m; ++i) picked[i] = pareto_sets[i][s.choice[i]];
    all.push_back({s, aggregate(picked, agg)});
    // odometer, last instance fastest
    std::size_t pos = m;
    for (;;) {
      if (pos == 0) {
        done = true;
        break;
      }
      --pos;
      if (++s.choice[pos] < pareto_sets[pos].size()) break;
      s.choice[pos] = 0;
    }
  }
  return all;
}

// Pareto filter over all states; each surviving vector keeps its lexicographically lowest state.
inline std::vector<StagePoint> brute_force_stage_pareto(std::span<const std::vector<ObjectiveVector>> pareto_sets,
                                                        const AggregatorSpec& agg) {
  std::vector<Tagged<State>> tagged;
  for (auto& p : brute_force_all_states(pareto_sets, agg)) tagged.push_back({std::move(p.state), std::move(p.objectives)});
  std::vector<StagePoint> out;
  for (auto& t : pareto_filter(std::move(tagged))) out.push_back({std::move(t.tag), std::move(t.objectives)});
  return out;
}

// Exhaustive minimum of sum_v w_v * F_v over all states (sum-only problems).
inline double brute_force_min_weighted_sum(std::span<const std::vector<ObjectiveVector>> pareto_sets,
                                           const AggregatorSpec& agg, std::span<const double> weight) {
  const auto sum_idx = agg.sum_indices();
  detail::require(weight.size() == sum_idx.size(), "brute_force_min_weighted_sum: weight dimension mismatch");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : brute_force_all_states(pareto_sets, agg)) {
    double score = 0.0;
    for (std::size_t v = 0; v < sum_idx.size(); ++v) score += weight[v] * p.objectives[sum_idx[v]];
    best = std::min(best, score);
  }
  return best;
}

}  // namespace stagesched::oracle

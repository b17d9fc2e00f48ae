#pragma once

// Random small-problem generators for property tests and `oracle-check`.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "stagesched/core_model.hpp"
#include "stagesched/stage_moo.hpp"

namespace stagesched::random {

using Rng = std::mt19937_64;

inline std::size_t uniform_size(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// m x n matrix whose columns all rank instances the same way; every entry distinct.
inline LatencyMatrix column_order_matrix(Rng& rng, std::size_t m, std::size_t n) {
  std::vector<std::size_t> rank(m);
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  std::shuffle(rank.begin(), rank.end(), rng);

  std::set<int> used;
  std::uniform_int_distribution<int> value(1, 10000);
  std::vector<double> values(m * n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<int> col;
    while (col.size() < m) {
      const int v = value(rng);
      if (used.insert(v).second) col.push_back(v);
    }
    std::sort(col.begin(), col.end());
    for (std::size_t r = 0; r < m; ++r) values[rank[r] * n + j] = col[r];
  }
  return LatencyMatrix(m, n, std::move(values));
}

// beta_j in [0, 3] with total capacity >= m. Rejection sampling; intended for n >= m.
inline std::vector<int> mixed_beta(Rng& rng, std::size_t n, std::size_t m) {
  detail::require(n >= m, "mixed_beta: need at least as many machines as instances");
  std::uniform_int_distribution<int> cap(0, 3);
  for (;;) {
    std::vector<int> beta(n);
    for (auto& b : beta) b = cap(rng);
    if (static_cast<std::size_t>(std::accumulate(beta.begin(), beta.end(), 0)) >= m) return beta;
  }
}

struct HierarchicalShape {
  std::size_t max_m = 4;
  std::size_t max_p = 4;
  std::size_t max_k = 4;
  bool sum_only = false;
  // Integer sum-objectives keep weighted sums exact under dyadic weights.
  bool integer_sums = false;
};

// Random aggregators (at least one Sum) and per-instance Pareto sets obtained by
// filtering random candidates. Max objectives are small integers so bound ties occur;
// sum objectives are continuous unless integer_sums is set.
inline HierarchicalProblem hierarchical_problem(Rng& rng, const HierarchicalShape& shape) {
  const std::size_t k = uniform_size(rng, 1, shape.max_k);
  std::vector<Aggregator> tags(k, Aggregator::Sum);
  if (!shape.sum_only) {
    std::bernoulli_distribution coin(0.5);
    for (auto& t : tags) t = coin(rng) ? Aggregator::Max : Aggregator::Sum;
    if (std::none_of(tags.begin(), tags.end(), [](Aggregator a) { return a == Aggregator::Sum; }))
      tags[uniform_size(rng, 0, k - 1)] = Aggregator::Sum;
  }

  HierarchicalProblem problem;
  problem.agg = AggregatorSpec(tags);
  const std::size_t m = uniform_size(rng, 1, shape.max_m);
  std::uniform_int_distribution<int> small(1, 20);
  std::uniform_int_distribution<int> integer(0, 100);
  std::uniform_real_distribution<double> real(0.0, 100.0);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<Tagged<std::size_t>> candidates;
    const std::size_t p = uniform_size(rng, 1, shape.max_p);
    for (std::size_t j = 0; j < p; ++j) {
      std::vector<double> v(k);
      for (std::size_t h = 0; h < k; ++h) {
        if (tags[h] == Aggregator::Max)
          v[h] = small(rng);
        else
          v[h] = shape.integer_sums ? integer(rng) : real(rng);
      }
      candidates.push_back({j, ObjectiveVector(std::move(v))});
    }
    std::vector<ObjectiveVector> sols;
    for (auto& c : pareto_filter(std::move(candidates))) sols.push_back(std::move(c.objectives));
    problem.instances.push_back(std::move(sols));
  }
  return problem;
}

// k = 2 (Max latency, Sum cost): latencies strictly descending, costs strictly ascending.
// Small integer ranges so equal latencies across instances are common.
inline HierarchicalProblem latency_cost_problem(Rng& rng, std::size_t max_m, std::size_t max_p) {
  HierarchicalProblem problem;
  problem.agg = AggregatorSpec{Aggregator::Max, Aggregator::Sum};
  const std::size_t m = uniform_size(rng, 1, max_m);
  std::vector<int> pool(40);
  std::iota(pool.begin(), pool.end(), 1);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t p = uniform_size(rng, 1, max_p);
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<int> lat(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(p));
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<int> cost(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(p));
    std::sort(lat.begin(), lat.end(), std::greater<>());
    std::sort(cost.begin(), cost.end());
    std::vector<ObjectiveVector> sols;
    for (std::size_t j = 0; j < p; ++j) sols.push_back(ObjectiveVector{double(lat[j]), double(cost[j])});
    problem.instances.push_back(std::move(sols));
  }
  return problem;
}

// Non-negative weights that are multiples of 1/16 and sum to exactly 1.
inline WeightVector dyadic_weight(Rng& rng, std::size_t k2) {
  constexpr int kUnits = 16;
  std::vector<int> cuts{0, kUnits};
  std::uniform_int_distribution<int> cut(0, kUnits);
  for (std::size_t v = 1; v < k2; ++v) cuts.push_back(cut(rng));
  std::sort(cuts.begin(), cuts.end());
  WeightVector w;
  for (std::size_t v = 0; v < k2; ++v) w.push_back(static_cast<double>(cuts[v + 1] - cuts[v]) / kUnits);
  return w;
}

}  // namespace stagesched::random

#pragma once

// Stage-level multi-objective resource assignment built from per-instance Pareto sets.
//
// Two solvers: the general hierarchical method (enumerate achievable values of every
// max-aggregated objective, weighted-sum select per instance under those bounds) and the
// heap-driven path walk for the (latency=max, cost=sum) case, which emits every stage
// Pareto point in strictly decreasing latency.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <tuple>
#include <span>
#include <utility>
#include <vector>

#include "stagesched/core_model.hpp"
#include "stagesched/errors.hpp"

namespace stagesched {

using WeightVector = std::vector<double>;

struct HierarchicalProblem {
  std::vector<std::vector<ObjectiveVector>> instances;  // instances[i][j] = j-th Pareto solution of instance i
  AggregatorSpec agg;
  std::vector<WeightVector> weights;  // each k2-dimensional; empty means default_weight_schedule(k2)

  std::size_t m() const { return instances.size(); }

  void validate() const {
    detail::require(!instances.empty(), "hierarchical problem: no instances");
    for (const auto& sols : instances) {
      detail::require(!sols.empty(), "hierarchical problem: empty instance Pareto set");
      for (const auto& f : sols) {
        detail::require(f.size() == agg.k(), "hierarchical problem: objective dimension does not match aggregators");
        for (double v : f.values) detail::require(std::isfinite(v), "hierarchical problem: non-finite objective");
      }
    }
    for (const auto& w : weights) validate_weight(w);
  }

  void validate_weight(const WeightVector& w) const {
    detail::require(w.size() == agg.k2(), "weight vector must have one entry per sum-aggregated objective");
    double total = 0.0;
    for (double v : w) {
      detail::require(v >= 0.0, "weight vector entries must be non-negative");
      total += v;
    }
    detail::require(w.empty() || std::abs(total - 1.0) <= 1e-9, "weight vector must sum to 1");
  }
};

// k2 = 1: {[1]}; k2 = 2: [t, 1-t] for t = 0, 0.1, ..., 1; k2 > 2: simplex lattice with step 0.25.
inline std::vector<WeightVector> default_weight_schedule(std::size_t k2) {
  std::vector<WeightVector> out;
  if (k2 == 0) {
    out.emplace_back();
  } else if (k2 == 1) {
    out.push_back({1.0});
  } else if (k2 == 2) {
    for (int i = 0; i <= 10; ++i) {
      const double t = i / 10.0;
      out.push_back({t, 1.0 - t});
    }
  } else {
    constexpr int kSteps = 4;
    std::vector<int> parts(k2, 0);
    auto emit = [&](auto&& self, std::size_t pos, int left) -> void {
      if (pos + 1 == k2) {
        parts[pos] = left;
        WeightVector w;
        for (int p : parts) w.push_back(static_cast<double>(p) / kSteps);
        out.push_back(std::move(w));
        return;
      }
      for (int a = left; a >= 0; --a) {
        parts[pos] = a;
        self(self, pos + 1, left - a);
      }
    };
    emit(emit, 0, kSteps);
  }
  return out;
}

namespace detail {

// Pairwise summation with a fixed split (mid = n/2). The path solver maintains the
// same tree incrementally, so its sums match aggregate() bit for bit.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  if (xs.size() == 1) return xs[0];
  const std::size_t mid = xs.size() / 2;
  return pairwise_sum(xs.subspan(0, mid)) + pairwise_sum(xs.subspan(mid));
}

class PairwiseSumTree {
 public:
  explicit PairwiseSumTree(std::vector<double> leaves) : n_(leaves.size()), leaves_(std::move(leaves)) {
    nodes_.assign(n_ == 0 ? 1 : 4 * n_, 0.0);
    if (n_ > 0) build(1, 0, n_);
  }

  double total() const { return n_ == 0 ? 0.0 : nodes_[1]; }

  void set(std::size_t i, double v) {
    leaves_[i] = v;
    update(1, 0, n_, i);
  }

 private:
  double build(std::size_t node, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return nodes_[node] = leaves_[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    const double l = build(2 * node, lo, mid);
    const double r = build(2 * node + 1, mid, hi);
    return nodes_[node] = l + r;
  }

  void update(std::size_t node, std::size_t lo, std::size_t hi, std::size_t i) {
    if (hi - lo == 1) {
      nodes_[node] = leaves_[lo];
      return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    if (i < mid)
      update(2 * node, lo, mid, i);
    else
      update(2 * node + 1, mid, hi, i);
    nodes_[node] = nodes_[2 * node] + nodes_[2 * node + 1];
  }

  std::size_t n_;
  std::vector<double> leaves_;
  std::vector<double> nodes_;
};

}  // namespace detail

// Componentwise max for Max objectives, (pairwise) sum for Sum objectives.
inline ObjectiveVector aggregate(std::span<const ObjectiveVector> per_instance, const AggregatorSpec& agg) {
  detail::require(!per_instance.empty(), "aggregate: no instance objectives");
  const std::size_t k = agg.k();
  std::vector<double> out(k, 0.0);
  std::vector<double> column(per_instance.size());
  for (const auto& f : per_instance) detail::require(f.size() == k, "aggregate: objective dimension mismatch");
  for (std::size_t h = 0; h < k; ++h) {
    for (std::size_t i = 0; i < per_instance.size(); ++i) column[i] = per_instance[i][h];
    out[h] = agg.tags[h] == Aggregator::Max ? *std::max_element(column.begin(), column.end())
                                            : detail::pairwise_sum(column);
  }
  return ObjectiveVector(std::move(out));
}

inline ObjectiveVector aggregate_state(const HierarchicalProblem& problem, const State& state) {
  detail::require(state.choice.size() == problem.m(), "state size does not match instance count");
  std::vector<ObjectiveVector> picked;
  picked.reserve(problem.m());
  for (std::size_t i = 0; i < problem.m(); ++i) {
    detail::require(state.choice[i] < problem.instances[i].size(), "state index out of range");
    picked.push_back(problem.instances[i][state.choice[i]]);
  }
  return aggregate(picked, problem.agg);
}

struct StagePoint {
  State state;
  ObjectiveVector objectives;
};

// Values of max-objective h that can be the stage maximum: every instance must be able
// to stay at or below the value. Sorted ascending, distinct.
inline std::vector<double> find_all_possible_values(const HierarchicalProblem& problem, std::size_t h) {
  detail::require(h < problem.agg.k() && problem.agg.tags[h] == Aggregator::Max,
                  "find_all_possible_values: objective is not max-aggregated");
  double floor_value = -std::numeric_limits<double>::infinity();
  for (const auto& sols : problem.instances) {
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& f : sols) lowest = std::min(lowest, f[h]);
    floor_value = std::max(floor_value, lowest);
  }
  std::vector<double> values;
  for (const auto& sols : problem.instances)
    for (const auto& f : sols)
      if (f[h] >= floor_value) values.push_back(f[h]);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

// Per instance: among solutions within every max bound, the one with the smallest
// weighted sum over the sum-objectives (ties: lowest index). Empty if some instance
// has nothing within bounds.
inline std::optional<StagePoint> find_optimal(const HierarchicalProblem& problem, std::span<const double> max_bounds,
                                              const WeightVector& weight) {
  const auto max_idx = problem.agg.max_indices();
  const auto sum_idx = problem.agg.sum_indices();
  detail::require(max_bounds.size() == max_idx.size(), "find_optimal: need one bound per max-aggregated objective");
  problem.validate_weight(weight);

  State state;
  state.choice.reserve(problem.m());
  for (const auto& sols : problem.instances) {
    std::optional<std::size_t> pick;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < sols.size(); ++j) {
      bool within = true;
      for (std::size_t b = 0; b < max_idx.size() && within; ++b) within = sols[j][max_idx[b]] <= max_bounds[b];
      if (!within) continue;
      double score = 0.0;
      for (std::size_t v = 0; v < sum_idx.size(); ++v) score += weight[v] * sols[j][sum_idx[v]];
      if (!pick || score < best) {
        pick = j;
        best = score;
      }
    }
    if (!pick) return std::nullopt;
    state.choice.push_back(*pick);
  }
  auto objectives = aggregate_state(problem, state);
  return StagePoint{std::move(state), std::move(objectives)};
}

// Cartesian product of achievable max-objective values x weight vectors, each combination
// resolved by find_optimal; the collected stage vectors are Pareto-filtered. Max components
// are the achieved maxima of the selections, which may sit below the enumerated bound.
inline std::vector<StagePoint> general_hierarchical_moo(const HierarchicalProblem& problem) {
  problem.validate();
  const auto max_idx = problem.agg.max_indices();
  const auto weights = problem.weights.empty() ? default_weight_schedule(problem.agg.k2()) : problem.weights;

  std::vector<std::vector<double>> value_lists;
  for (std::size_t h : max_idx) value_lists.push_back(find_all_possible_values(problem, h));

  std::vector<Tagged<State>> collected;
  std::vector<std::size_t> odometer(max_idx.size(), 0);
  std::vector<double> bounds(max_idx.size());
  for (;;) {
    for (std::size_t b = 0; b < max_idx.size(); ++b) bounds[b] = value_lists[b][odometer[b]];
    for (const auto& w : weights) {
      if (auto point = find_optimal(problem, bounds, w)) collected.push_back({point->state, point->objectives});
    }
    std::size_t pos = 0;
    while (pos < odometer.size() && ++odometer[pos] == value_lists[pos].size()) odometer[pos++] = 0;
    if (pos == odometer.size()) break;
  }

  std::vector<StagePoint> out;
  for (auto& t : pareto_filter(std::move(collected))) out.push_back({std::move(t.tag), std::move(t.objectives)});
  return out;
}

// Result of the path walk. States are stored as a log of single-instance advances so
// that long paths over large stages stay O(m + sum p_i) in memory.
class RaaPath {
 public:
  std::size_t size() const { return objectives_.size(); }
  bool empty() const { return objectives_.empty(); }
  const ObjectiveVector& objectives(std::size_t k) const { return objectives_[k]; }
  const std::vector<ObjectiveVector>& all_objectives() const { return objectives_; }

  State state(std::size_t k) const {
    State s;
    s.choice.assign(m_, 0);
    for (std::size_t t = 0; t < advances_before_[k]; ++t) ++s.choice[advance_log_[t]];
    return s;
  }

  std::vector<StagePoint> points() const {
    std::vector<StagePoint> out;
    out.reserve(size());
    State s;
    s.choice.assign(m_, 0);
    std::size_t applied = 0;
    for (std::size_t k = 0; k < size(); ++k) {
      for (; applied < advances_before_[k]; ++applied) ++s.choice[advance_log_[applied]];
      out.push_back({s, objectives_[k]});
    }
    return out;
  }

 private:
  friend RaaPath raa_path(const HierarchicalProblem& problem);

  std::size_t m_ = 0;
  std::vector<ObjectiveVector> objectives_;
  std::vector<std::size_t> advances_before_;
  std::vector<std::size_t> advance_log_;
};

// Requires k = 2 with aggregators (Max, Sum) and every instance list strictly
// descending in latency. Heap ties pop the lowest instance index first.
inline RaaPath raa_path(const HierarchicalProblem& problem) {
  problem.validate();
  detail::require(problem.agg == AggregatorSpec{Aggregator::Max, Aggregator::Sum},
                  "raa_path: aggregators must be exactly (Max, Sum)");
  const std::size_t m = problem.m();
  for (const auto& sols : problem.instances)
    for (std::size_t j = 1; j < sols.size(); ++j)
      detail::require(sols[j][0] < sols[j - 1][0], "raa_path: instance solutions must be strictly descending in latency");

  RaaPath path;
  path.m_ = m;
  std::vector<std::size_t> lambda(m, 0);
  std::vector<double> costs(m);
  for (std::size_t i = 0; i < m; ++i) costs[i] = problem.instances[i][0][1];
  detail::PairwiseSumTree cost_sum(std::move(costs));

  using Entry = std::pair<double, std::size_t>;
  auto lower_priority = [](const Entry& a, const Entry& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second > b.second;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(lower_priority)> heap(lower_priority);
  for (std::size_t i = 0; i < m; ++i) heap.emplace(problem.instances[i][0][0], i);

  double smax = std::numeric_limits<double>::infinity();
  for (;;) {
    const auto [qmax, i] = heap.top();
    heap.pop();
    if (qmax < smax) {
      path.objectives_.push_back(ObjectiveVector{qmax, cost_sum.total()});
      path.advances_before_.push_back(path.advance_log_.size());
      smax = qmax;
    }
    if (++lambda[i] >= problem.instances[i].size()) break;
    path.advance_log_.push_back(i);
    cost_sum.set(i, problem.instances[i][lambda[i]][1]);
    heap.emplace(problem.instances[i][lambda[i]][0], i);
  }
  return path;
}

// Weighted Utopia Nearest: min-max normalise each objective over the set (or the supplied
// per-objective (min, max) ranges), then pick the point closest to the utopia point
// (componentwise minimum) under the weighted Euclidean norm. Ties: lowest objective 0.
inline std::size_t wun_recommend(std::span<const ObjectiveVector> set, std::span<const double> wun_weights,
                                 std::optional<std::vector<std::pair<double, double>>> normalization = std::nullopt) {
  detail::require(!set.empty(), "wun_recommend: empty solution set");
  const std::size_t k = set.front().size();
  detail::require(wun_weights.size() == k, "wun_recommend: one weight per objective required");
  for (double w : wun_weights) detail::require(w >= 0.0, "wun_recommend: weights must be non-negative");
  for (const auto& f : set) detail::require(f.size() == k, "wun_recommend: mixed objective dimensions");

  std::vector<double> lo(k, std::numeric_limits<double>::infinity());
  std::vector<double> hi(k, -std::numeric_limits<double>::infinity());
  for (const auto& f : set) {
    for (std::size_t h = 0; h < k; ++h) {
      lo[h] = std::min(lo[h], f[h]);
      hi[h] = std::max(hi[h], f[h]);
    }
  }
  const std::vector<double> utopia = lo;
  if (normalization) {
    detail::require(normalization->size() == k, "wun_recommend: one normalisation range per objective required");
    for (std::size_t h = 0; h < k; ++h) std::tie(lo[h], hi[h]) = (*normalization)[h];
  }
  auto norm = [&](std::size_t h, double v) { return hi[h] > lo[h] ? (v - lo[h]) / (hi[h] - lo[h]) : 0.0; };

  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < set.size(); ++s) {
    double d2 = 0.0;
    for (std::size_t h = 0; h < k; ++h) {
      const double diff = norm(h, set[s][h]) - norm(h, utopia[h]);
      d2 += wun_weights[h] * diff * diff;
    }
    const double dist = std::sqrt(d2);
    if (dist < best_dist || (dist == best_dist && set[s][0] < set[best][0])) {
      best = s;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace stagesched

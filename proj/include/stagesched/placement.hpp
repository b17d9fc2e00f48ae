#pragma once

// Placement plans: the watermark baseline, the BPL-greedy (IPA) solver, and its
// clustering-boosted variant for large stages.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "stagesched/core_model.hpp"
#include "stagesched/errors.hpp"
#include "stagesched/latency_model.hpp"

namespace stagesched {

// alpha caps instances per machine (diversity); demand is the default config used while placing.
struct CapacityPolicy {
  int alpha = 1;
  ResourceConfig demand;
};

enum class KeyResource { Cpu, Memory };

namespace detail {

// floor() that tolerates representation error just below an integer (2.9999999999 -> 3).
inline int safe_floor(double x) {
  if (!(x > 0.0)) return 0;
  const double f = std::floor(x + 1e-9 * std::max(1.0, x));
  return f > static_cast<double>(std::numeric_limits<int>::max()) ? std::numeric_limits<int>::max()
                                                                   : static_cast<int>(f);
}

}  // namespace detail

inline std::vector<int> compute_beta(std::span<const MachineSpec> machines, const CapacityPolicy& policy) {
  detail::require(policy.demand.cpu_cores > 0.0 && policy.demand.mem_gb > 0.0, "compute_beta: demand must be positive");
  detail::require(policy.alpha >= 0, "compute_beta: alpha must be >= 0");
  std::vector<int> beta;
  beta.reserve(machines.size());
  for (const auto& m : machines) {
    const int by_cpu = detail::safe_floor(m.free_cpu() / policy.demand.cpu_cores);
    const int by_mem = detail::safe_floor(m.free_mem() / policy.demand.mem_gb);
    beta.push_back(std::max(0, std::min({by_cpu, by_mem, policy.alpha})));
  }
  return beta;
}

// Baseline: machines ordered by ascending key-resource utilisation (ties by id),
// machines with no capacity skipped, instance i goes to the i-th machine.
inline PlacementPlan fuxi_place(const LatencyMatrix& latencies, std::span<const MachineSpec> machines,
                                std::span<const int> beta, KeyResource key = KeyResource::Cpu) {
  detail::require(latencies.cols() == machines.size() && beta.size() == machines.size(),
                  "fuxi_place: machine count mismatch");
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < machines.size(); ++j)
    if (beta[j] >= 1) order.push_back(j);
  auto util = [&](std::size_t j) { return key == KeyResource::Cpu ? machines[j].cpu_util : machines[j].mem_util; };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (util(a) != util(b)) return util(a) < util(b);
    return machines[a].id < machines[b].id;
  });
  if (order.size() < latencies.rows())
    throw NoSolution("fuxi: only " + std::to_string(order.size()) + " machines available for " +
                     std::to_string(latencies.rows()) + " instances");
  PlacementPlan plan;
  plan.machine_of.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(latencies.rows()));
  return plan;
}

inline PlacementPlan fuxi_place(const LatencyMatrix& latencies, std::span<const MachineSpec> machines,
                                const CapacityPolicy& policy, KeyResource key = KeyResource::Cpu) {
  const auto beta = compute_beta(machines, policy);
  return fuxi_place(latencies, machines, beta, key);
}

// Best-possible-latency greedy. Repeatedly sends the unplaced instance whose best
// latency over the still-available machines is largest to that machine. BPLs are
// refreshed only when a machine runs out of capacity. Ties: lowest instance index,
// then lowest machine index.
inline PlacementPlan ipa_place(const LatencyMatrix& latencies, std::span<const int> beta) {
  const std::size_t m = latencies.rows();
  const std::size_t n = latencies.cols();
  detail::require(beta.size() == n, "ipa_place: beta size does not match machine count");

  std::vector<int> slots(beta.begin(), beta.end());
  std::vector<char> available(n);
  for (std::size_t j = 0; j < n; ++j) available[j] = slots[j] > 0;

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<double> bpl(m, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> best(m, kNone);
  auto refresh = [&](std::size_t i) {
    bpl[i] = std::numeric_limits<double>::infinity();
    best[i] = kNone;
    const auto row = latencies.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (available[j] && row[j] < bpl[i]) {
        bpl[i] = row[j];
        best[i] = j;
      }
    }
  };
  for (std::size_t i = 0; i < m; ++i) refresh(i);

  PlacementPlan plan;
  plan.machine_of.assign(m, kNone);
  std::vector<char> placed(m, 0);
  for (std::size_t step = 0; step < m; ++step) {
    std::size_t it = kNone;
    for (std::size_t i = 0; i < m; ++i) {
      if (!placed[i] && (it == kNone || bpl[i] > bpl[it])) it = i;
    }
    const std::size_t jt = best[it];
    if (jt == kNone) throw NoSolution("ipa: machines exhausted with " + std::to_string(m - step) + " instances left");
    plan.machine_of[it] = jt;
    placed[it] = 1;
    if (--slots[jt] == 0) {
      available[jt] = 0;
      for (std::size_t i = 0; i < m; ++i)
        if (!placed[i] && best[i] == jt) refresh(i);
    }
  }
  return plan;
}

// Instance indices sorted by descending input_rows (ties: ascending id).
struct InstanceCluster {
  std::vector<std::size_t> members;

  std::size_t representative() const { return members.front(); }
  std::size_t size() const { return members.size(); }
};

// Machine indices (ascending id) sharing (cpu bucket, mem bucket, hw class).
struct MachineCluster {
  int cpu_bucket = 0;
  int mem_bucket = 0;
  std::string hw_class;
  std::vector<std::size_t> members;
  std::size_t representative = 0;  // member with the median cpu_util
};

struct KdeParams {
  std::optional<double> bandwidth;  // rows; Silverman's rule when unset
  std::size_t grid_points = 512;
};

struct ClusterParams {
  KdeParams kde;
  int buckets = 4;
};

// Silverman's rule as in scipy.stats.gaussian_kde: sigma * (3n/4)^(-1/5), sample std.
inline double silverman_bandwidth(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 2) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sigma = std::sqrt(ss / (n - 1.0));
  return sigma * std::pow(n * 3.0 / 4.0, -0.2);
}

// Gaussian KDE of `xs` (unnormalised) on `grid_points` evenly spaced points over [min, max].
inline std::vector<double> kde_density(std::span<const double> xs, double bandwidth, double lo, double hi,
                                       std::size_t grid_points) {
  std::vector<double> density(grid_points, 0.0);
  const double step = grid_points > 1 ? (hi - lo) / static_cast<double>(grid_points - 1) : 0.0;
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double at = lo + step * static_cast<double>(g);
    double d = 0.0;
    for (double x : xs) {
      const double z = (at - x) / bandwidth;
      d += std::exp(-0.5 * z * z);
    }
    density[g] = d;
  }
  return density;
}

// Split instances at the local minima of the row-count density.
inline std::vector<InstanceCluster> cluster_instances_1d(std::span<const InstanceSpec> instances,
                                                         const KdeParams& params = {}) {
  detail::require(!instances.empty(), "cluster_instances_1d: need at least one instance");
  detail::require(params.grid_points >= 3, "cluster_instances_1d: grid needs at least 3 points");

  std::vector<std::size_t> order(instances.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (instances[a].input_rows != instances[b].input_rows) return instances[a].input_rows > instances[b].input_rows;
    return instances[a].id < instances[b].id;
  });

  std::vector<double> xs;
  xs.reserve(instances.size());
  for (const auto& inst : instances) xs.push_back(static_cast<double>(inst.input_rows));
  const double lo = static_cast<double>(instances[order.back()].input_rows);
  const double hi = static_cast<double>(instances[order.front()].input_rows);

  std::vector<double> boundaries;
  const double h = params.bandwidth.value_or(silverman_bandwidth(xs));
  if (hi > lo && h > 0.0) {
    const auto density = kde_density(xs, h, lo, hi, params.grid_points);
    const double step = (hi - lo) / static_cast<double>(params.grid_points - 1);
    for (std::size_t g = 1; g + 1 < density.size(); ++g) {
      if (density[g] < density[g - 1] && density[g] <= density[g + 1])
        boundaries.push_back(lo + step * static_cast<double>(g));
    }
  }

  // Walk from the largest rows downwards; a new cluster starts whenever a boundary is crossed.
  std::vector<InstanceCluster> clusters;
  std::size_t next_boundary = boundaries.size();
  for (std::size_t idx : order) {
    const double x = static_cast<double>(instances[idx].input_rows);
    bool crossed = clusters.empty();
    while (next_boundary > 0 && x <= boundaries[next_boundary - 1]) {
      --next_boundary;
      crossed = true;
    }
    if (crossed) clusters.emplace_back();
    clusters.back().members.push_back(idx);
  }
  return clusters;
}

inline int quantize_util(double util, int buckets) {
  const int q = static_cast<int>(std::floor(util * buckets));
  return std::clamp(q, 0, buckets - 1);
}

inline std::vector<MachineCluster> cluster_machines(std::span<const MachineSpec> machines, int buckets) {
  detail::require(buckets >= 1, "cluster_machines: buckets must be >= 1");
  std::map<std::tuple<int, int, std::string>, std::vector<std::size_t>> groups;
  for (std::size_t j = 0; j < machines.size(); ++j) {
    const auto& m = machines[j];
    groups[{quantize_util(m.cpu_util, buckets), quantize_util(m.mem_util, buckets), m.hw_class}].push_back(j);
  }
  std::vector<MachineCluster> out;
  out.reserve(groups.size());
  for (auto& [key, members] : groups) {
    MachineCluster c;
    std::tie(c.cpu_bucket, c.mem_bucket, c.hw_class) = key;
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) { return machines[a].id < machines[b].id; });
    auto by_util = members;
    std::sort(by_util.begin(), by_util.end(), [&](std::size_t a, std::size_t b) {
      if (machines[a].cpu_util != machines[b].cpu_util) return machines[a].cpu_util < machines[b].cpu_util;
      return machines[a].id < machines[b].id;
    });
    c.representative = by_util[(by_util.size() - 1) / 2];
    c.members = std::move(members);
    out.push_back(std::move(c));
  }
  return out;
}

// Greedy over clusters. `rep_latencies` is m' x n' (cluster representatives).
// On each match, delta = min(instances left in the cluster, slots left in the
// machine cluster); the delta largest-row members take machine slots in member
// order, each machine absorbing up to its own beta.
inline PlacementPlan ipa_place_clusters(std::size_t instance_count, std::span<const InstanceCluster> iclusters,
                                        std::span<const MachineCluster> mclusters, const LatencyMatrix& rep_latencies,
                                        std::span<const int> beta) {
  const std::size_t mi = iclusters.size();
  const std::size_t mc = mclusters.size();
  detail::require(rep_latencies.rows() == mi && rep_latencies.cols() == mc,
                  "ipa_place_clusters: representative matrix shape mismatch");

  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<int> slots(beta.begin(), beta.end());
  std::vector<long long> cluster_slots(mc, 0);
  std::vector<std::size_t> machine_cursor(mc, 0);
  for (std::size_t c = 0; c < mc; ++c) {
    for (std::size_t j : mclusters[c].members) {
      detail::require(j < slots.size(), "ipa_place_clusters: machine index out of range");
      cluster_slots[c] += std::max(0, slots[j]);
    }
  }
  std::vector<std::size_t> inst_cursor(mi, 0);
  std::vector<char> inst_active(mi, 1);
  std::vector<char> mach_active(mc);
  for (std::size_t c = 0; c < mc; ++c) mach_active[c] = cluster_slots[c] > 0;

  std::vector<double> bpl(mi);
  std::vector<std::size_t> best(mi, kNone);
  auto refresh = [&](std::size_t i) {
    bpl[i] = std::numeric_limits<double>::infinity();
    best[i] = kNone;
    for (std::size_t c = 0; c < mc; ++c) {
      if (mach_active[c] && rep_latencies.at(i, c) < bpl[i]) {
        bpl[i] = rep_latencies.at(i, c);
        best[i] = c;
      }
    }
  };
  for (std::size_t i = 0; i < mi; ++i) refresh(i);

  PlacementPlan plan;
  plan.machine_of.assign(instance_count, kNone);
  std::size_t remaining = 0;
  for (const auto& c : iclusters) remaining += c.size();
  detail::require(remaining == instance_count, "ipa_place_clusters: clusters do not cover every instance");

  while (remaining > 0) {
    std::size_t it = kNone;
    for (std::size_t i = 0; i < mi; ++i)
      if (inst_active[i] && (it == kNone || bpl[i] > bpl[it])) it = i;
    const std::size_t ct = best[it];
    if (ct == kNone) throw NoSolution("ipa-clustered: machines exhausted with " + std::to_string(remaining) +
                                      " instances left");

    const auto& members = iclusters[it].members;
    const long long left_in_cluster = static_cast<long long>(members.size() - inst_cursor[it]);
    long long delta = std::min(left_in_cluster, cluster_slots[ct]);
    const auto& machs = mclusters[ct].members;
    while (delta > 0) {
      const std::size_t j = machs[machine_cursor[ct]];
      if (slots[j] <= 0) {
        ++machine_cursor[ct];
        continue;
      }
      plan.machine_of[members[inst_cursor[it]++]] = j;
      --slots[j];
      --cluster_slots[ct];
      --remaining;
      --delta;
    }
    if (inst_cursor[it] == members.size()) inst_active[it] = 0;
    if (cluster_slots[ct] == 0) {
      mach_active[ct] = 0;
      for (std::size_t i = 0; i < mi; ++i)
        if (inst_active[i] && best[i] == ct) refresh(i);
    }
  }
  return plan;
}

// Cluster instances (KDE over rows) and machines (discretised utilisation + hw class),
// then run the cluster-level greedy on representative latencies.
inline PlacementPlan ipa_place_clustered(std::span<const InstanceSpec> instances, std::span<const MachineSpec> machines,
                                         const CapacityPolicy& policy, const ClusterParams& cluster_params,
                                         const PredictorParams& predictor, double min_latency = kDefaultMinLatency) {
  const auto beta = compute_beta(machines, policy);
  const auto iclusters = cluster_instances_1d(instances, cluster_params.kde);
  const auto mclusters = cluster_machines(machines, cluster_params.buckets);

  std::vector<double> values;
  values.reserve(iclusters.size() * mclusters.size());
  for (const auto& ic : iclusters) {
    const double f = instance_factor(instances[ic.representative()], policy.demand, predictor);
    for (const auto& mc : mclusters)
      values.push_back(std::max(min_latency, f * machine_factor(machines[mc.representative], predictor)));
  }
  const LatencyMatrix rep(iclusters.size(), mclusters.size(), std::move(values));
  return ipa_place_clusters(instances.size(), iclusters, mclusters, rep, beta);
}

}  // namespace stagesched

#include <gtest/gtest.h>

#include <random>

#include "stagesched/core_model.hpp"

namespace stagesched {
namespace {

// Naive O(n^2) reference for the non-dominated subset (ignores duplicate handling).
std::vector<ObjectiveVector> naive_front(const std::vector<ObjectiveVector>& pts) {
  std::vector<ObjectiveVector> out;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    bool dominated = false;
    for (std::size_t b = 0; b < pts.size() && !dominated; ++b) dominated = dominates(pts[b], pts[a]);
    if (!dominated && std::find(out.begin(), out.end(), pts[a]) == out.end()) out.push_back(pts[a]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ObjectiveVector> objectives_of(const std::vector<Tagged<int>>& pts) {
  std::vector<ObjectiveVector> out;
  for (const auto& p : pts) out.push_back(p.objectives);
  return out;
}

TEST(Dominates, StrictImprovement) { EXPECT_TRUE(dominates({1, 2}, {2, 3})); }

TEST(Dominates, EqualPointDoesNotDominateItself) { EXPECT_FALSE(dominates({1, 2}, {1, 2})); }

TEST(Dominates, TradeOffPointsAreIncomparable) {
  EXPECT_FALSE(dominates({150, 10}, {100, 20}));
  EXPECT_FALSE(dominates({100, 20}, {150, 10}));
}

TEST(Dominates, DimensionMismatchIsContractViolation) {
  EXPECT_THROW(dominates({1, 2}, {1, 2, 3}), ContractViolation);
}

TEST(ParetoFilter, ThreeMutuallyNonDominated) {
  const std::vector<ObjectiveVector> pts{{15, 10, 5}, {20, 15, 2}, {12, 20, 30}};
  ASSERT_EQ(naive_front(pts).size(), 3u);
  std::vector<Tagged<int>> tagged{{0, pts[0]}, {1, pts[1]}, {2, pts[2]}};
  EXPECT_EQ(pareto_filter(tagged).size(), 3u);
}

TEST(ParetoFilter, TotalOrderKeepsMinimum) {
  auto out = pareto_filter(std::vector<Tagged<int>>{{0, {1, 1}}, {1, {2, 2}}});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].objectives, (ObjectiveVector{1, 1}));
}

TEST(ParetoFilter, EmptyInput) { EXPECT_TRUE(pareto_filter(std::vector<Tagged<int>>{}).empty()); }

TEST(ParetoFilter, DuplicatesKeepLowestTag) {
  auto out = pareto_filter(std::vector<Tagged<int>>{{7, {3, 3}}, {2, {3, 3}}, {5, {3, 3}}});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].tag, 2);
}

TEST(ParetoFilter, TwoObjectiveOutputIsStrictlyMonotone) {
  auto out = pareto_filter(std::vector<Tagged<int>>{{0, {5, 1}}, {1, {1, 5}}, {2, {3, 3}}, {3, {4, 4}}, {4, {3, 2}}});
  ASSERT_EQ(out.size(), 3u);
  for (std::size_t i = 1; i < out.size(); ++i) {
    EXPECT_GT(out[i - 1].objectives[0], out[i].objectives[0]);
    EXPECT_LT(out[i - 1].objectives[1], out[i].objectives[1]);
  }
}

class ParetoProperties : public ::testing::TestWithParam<int> {};

TEST_P(ParetoProperties, MatchesNaiveFilterAndInvariantsHold) {
  std::mt19937_64 rng(GetParam());
  std::uniform_int_distribution<int> val(0, 9);
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_int_distribution<int> count(0, 30);
  const int k = dim(rng);
  std::vector<Tagged<int>> pts;
  const int n = count(rng);
  for (int t = 0; t < n; ++t) {
    std::vector<double> v(k);
    for (auto& x : v) x = val(rng);
    pts.push_back({t, ObjectiveVector(v)});
  }

  const auto front = pareto_filter(pts);
  auto got = objectives_of(front);
  std::sort(got.begin(), got.end());
  std::vector<ObjectiveVector> all;
  for (const auto& p : pts) all.push_back(p.objectives);
  EXPECT_EQ(got, naive_front(all));

  // idempotent
  EXPECT_EQ(pareto_filter(front), front);

  // antisymmetry, and coverage: every input is kept or dominated by an output
  for (const auto& a : pts) {
    for (const auto& b : pts) EXPECT_FALSE(dominates(a.objectives, b.objectives) && dominates(b.objectives, a.objectives));
    const bool kept = std::any_of(front.begin(), front.end(), [&](const auto& f) { return f.objectives == a.objectives; });
    const bool covered =
        std::any_of(front.begin(), front.end(), [&](const auto& f) { return dominates(f.objectives, a.objectives); });
    EXPECT_TRUE(kept || covered);
  }
}

INSTANTIATE_TEST_SUITE_P(Random, ParetoProperties, ::testing::Range(0, 200));

TEST(LatencyMatrix, RejectsNonPositiveEntries) {
  EXPECT_THROW((LatencyMatrix{{1.0, 0.0}}), ContractViolation);
  EXPECT_THROW(LatencyMatrix(1, 2, {1.0}), ContractViolation);
}

TEST(AggregatorSpec, CountsMaxAndSum) {
  const AggregatorSpec agg{Aggregator::Max, Aggregator::Sum, Aggregator::Max, Aggregator::Sum, Aggregator::Sum};
  EXPECT_EQ(agg.k1(), 2u);
  EXPECT_EQ(agg.k2(), 3u);
  EXPECT_EQ(agg.max_indices(), (std::vector<std::size_t>{0, 2}));
}

TEST(Validate, InstanceAndMachineInvariants) {
  EXPECT_THROW(validate(InstanceSpec{1, -1, 0}), ContractViolation);
  EXPECT_THROW(validate(MachineSpec{1, "small", 1.5, 0.0, 1.0, 1.0}), ContractViolation);
  EXPECT_THROW(validate(MachineSpec{1, "small", 0.5, 0.0, 0.0, 1.0}), ContractViolation);
  std::vector<InstanceSpec> dup{{1, 1, 1}, {1, 2, 2}};
  EXPECT_THROW(validate_unique_ids(dup), ContractViolation);
}

}  // namespace
}  // namespace stagesched

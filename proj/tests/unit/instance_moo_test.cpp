#include <gtest/gtest.h>

#include <map>

#include "stagesched/instance_moo.hpp"

namespace stagesched {
namespace {

const MachineSpec kMachine{0, "medium", 0.3, 0.2, 32, 128};
const InstanceSpec kInstance{0, 1'000'000, 100'000'000};

TEST(CostOf, ResourceHours) {
  // half an hour holding 2 cores and 4 GB: 0.5 * (2 * 1 + 4 * 0.25)
  EXPECT_DOUBLE_EQ(cost_of(1800, {2, 4}, {1, 0.25}), 1.5);
  EXPECT_EQ(cost_of(0, {4, 12}, {}), 0.0);
  EXPECT_THROW(cost_of(-1, {1, 1}, {}), ContractViolation);
}

TEST(ConfigGrid, RejectsEmptyOrUnsortedChoices) {
  EXPECT_THROW((ConfigGrid{{}, {1}}.validate()), ConfigError);
  EXPECT_THROW((ConfigGrid{{2, 1}, {1}}.validate()), ConfigError);
  EXPECT_EQ((ConfigGrid{{1, 2}, {1, 2, 3}}.configs_within({1.5, 2.0}).size()), 2u);
}

TEST(InstancePareto, SingletonGridYieldsOnePoint) {
  const auto model = latency_cost_model({}, {});
  const auto set = instance_pareto(kInstance, kMachine, ConfigGrid{{2.0}, {4.0}}, model);
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set[0].tag, (ResourceConfig{2.0, 4.0}));
  EXPECT_EQ(set[0].objectives, model.evaluate(kInstance, {2.0, 4.0}, kMachine));
}

TEST(InstancePareto, DominatedTableEntryIsDropped) {
  // [150, 5] is dominated by [100, 5]; [120, 3] and [80, 9] survive.
  const std::map<double, ObjectiveVector> table{{1, {150, 5}}, {2, {100, 5}}, {3, {120, 3}}, {4, {80, 9}}};
  ObjectiveModel model{{[&](const InstanceSpec&, const ResourceConfig& c, const MachineSpec&) { return table.at(c.cpu_cores)[0]; },
                        [&](const InstanceSpec&, const ResourceConfig& c, const MachineSpec&) { return table.at(c.cpu_cores)[1]; }}};
  const auto set = instance_pareto(kInstance, kMachine, ConfigGrid{{1, 2, 3, 4}, {1}}, model);
  ASSERT_EQ(set.size(), 3u);
  EXPECT_EQ(set[0].objectives, (ObjectiveVector{120, 3}));
  EXPECT_EQ(set[1].objectives, (ObjectiveVector{100, 5}));
  EXPECT_EQ(set[2].objectives, (ObjectiveVector{80, 9}));
}

TEST(InstancePareto, CpuSweepMatchesNaiveFilter) {
  PredictorParams p;
  p.mem_penalty = 0.0;  // memory then only adds cost, so the smallest memory dominates
  const auto model = latency_cost_model(p, {});
  const ConfigGrid grid{{0.5, 1, 2, 4, 8}, {1, 2, 4}};
  const auto set = instance_pareto(kInstance, kMachine, grid, model);
  std::vector<ObjectiveVector> expect;
  const auto configs = grid.configs();
  for (const auto& a : configs) {
    const auto fa = model.evaluate(kInstance, a, kMachine);
    bool dominated = false;
    for (const auto& b : configs) dominated = dominated || dominates(model.evaluate(kInstance, b, kMachine), fa);
    if (!dominated) expect.push_back(fa);
  }
  ASSERT_EQ(set.size(), expect.size());
  for (const auto& pt : set) {
    EXPECT_EQ(pt.tag.mem_gb, 1.0);
    EXPECT_NE(std::find(expect.begin(), expect.end(), pt.objectives), expect.end());
  }
}

TEST(InstancePareto, TwoObjectiveFrontIsStrictlyMonotone) {
  const auto model = latency_cost_model({}, {});
  for (const char* hw : {"small", "medium", "large"}) {
    MachineSpec mach = kMachine;
    mach.hw_class = hw;
    const auto set = instance_pareto(kInstance, mach, ConfigGrid{}, model);
    ASSERT_GE(set.size(), 1u);
    for (std::size_t j = 1; j < set.size(); ++j) {
      EXPECT_GT(set[j - 1].objectives[0], set[j].objectives[0]);
      EXPECT_LT(set[j - 1].objectives[1], set[j].objectives[1]);
    }
  }
}

TEST(InstancePareto, EmptyCandidatesIsContractViolation) {
  std::vector<ResourceConfig> none;
  EXPECT_THROW(instance_pareto(kInstance, kMachine, none, latency_cost_model({}, {})), ContractViolation);
}

}  // namespace
}  // namespace stagesched

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "stagesched/harness.hpp"

namespace stagesched {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("stagesched_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

const char* kMachines = R"({"machines": [
  {"id": 1, "hw_class": "small", "cpu_util": 0.1, "mem_util": 0.2, "cpu_capacity": 32, "mem_capacity": 128},
  {"id": 2, "hw_class": "large", "cpu_util": 0.5, "mem_util": 0.1, "cpu_capacity": 32, "mem_capacity": 128}]})";

std::string load_error(const fs::path& stages, const fs::path& machines) {
  try {
    load_traces(stages, machines);
  } catch (const LoadError& e) {
    return e.what();
  }
  return "";
}

using LoadTraces = TempDir;

TEST_F(LoadTraces, NegativeRowsNamesFieldAndStage) {
  const auto s = write("s.json", R"([{"stage_id": 5, "default_config": {"cpu_cores": 1, "mem_gb": 4},
      "instances": [{"id": 0, "input_rows": -3, "input_bytes": 0}]}])");
  const auto msg = load_error(s, write("m.json", kMachines));
  EXPECT_NE(msg.find("stage 5"), std::string::npos) << msg;
  EXPECT_NE(msg.find("input_rows"), std::string::npos) << msg;
}

TEST_F(LoadTraces, MissingFieldAndBadUtil) {
  const auto s = write("s.json", R"([{"stage_id": 1, "instances": []}])");
  EXPECT_NE(load_error(s, write("m.json", kMachines)).find("default_config"), std::string::npos);
  const auto ok = write("ok.json", R"([{"stage_id": 1, "default_config": {"cpu_cores": 1, "mem_gb": 4},
      "instances": [{"id": 0, "input_rows": 3, "input_bytes": 0}]}])");
  const auto m = write("bad.json", R"({"machines": [{"id": 1, "hw_class": "small", "cpu_util": 1.5,
      "mem_util": 0.2, "cpu_capacity": 32, "mem_capacity": 128}]})");
  EXPECT_NE(load_error(ok, m).find("cpu_util"), std::string::npos);
  EXPECT_NE(load_error(dir_ / "absent.json", m).find("cannot open"), std::string::npos);
}

TEST_F(LoadTraces, RoundTripThroughFiles) {
  WorkloadParams p;
  p.n_stages = 5;
  p.n_machines = 7;
  const auto t = generate_workload(p);
  save_traces(t, dir_ / "s.json", dir_ / "m.json");
  const auto back = load_traces(dir_ / "s.json", dir_ / "m.json");
  EXPECT_EQ(back.stages, t.stages);
  EXPECT_EQ(back.cluster, t.cluster);
}

TEST(GenerateWorkload, DeterministicAndShaped) {
  WorkloadParams p;
  p.seed = 11;
  p.n_stages = 20;
  const auto a = generate_workload(p), b = generate_workload(p);
  EXPECT_EQ(a.stages, b.stages);
  EXPECT_EQ(a.cluster, b.cluster);
  p.m_min = p.m_max = 1;
  p.skew = 0.0;
  for (const auto& s : generate_workload(p).stages) EXPECT_EQ(s.instances.size(), 1u);
}

Traces small_workload(std::uint64_t seed, std::size_t stages = 30) {
  WorkloadParams p;
  p.seed = seed;
  p.n_stages = stages;
  p.m_max = 20;
  p.n_machines = 40;
  return generate_workload(p);
}

TEST(RunStage, ReportsAreConsistentAndFeasible) {
  const auto t = small_workload(3);
  HarnessConfig cfg;
  for (Mode mode : kAllModes) {
    for (const auto& stage : t.stages) {
      const auto r = run_stage(stage, t.cluster, mode, cfg);
      ASSERT_EQ(r.instances.size(), stage.instances.size());
      EXPECT_EQ(r.stage_latency_s, recompute_stage_latency(r));
      EXPECT_DOUBLE_EQ(r.stage_cost, recompute_stage_cost(r, cfg.cost_weights));
      const int alpha = detail::effective_alpha(cfg.alpha, stage.instances.size(), t.cluster.machines.size());
      std::map<std::int64_t, int> per_machine;
      for (const auto& i : r.instances) EXPECT_LE(++per_machine[i.machine_id], alpha);
    }
  }
}

TEST(RunStage, RaaModesAgreeAndIpaNeverLosesToFuxi) {
  const auto t = small_workload(4);
  HarnessConfig cfg;
  for (const auto& stage : t.stages) {
    const auto fuxi = run_stage(stage, t.cluster, Mode::Fuxi, cfg);
    const auto ipa = run_stage(stage, t.cluster, Mode::Ipa, cfg);
    EXPECT_LE(ipa.stage_latency_s, fuxi.stage_latency_s);
    const auto general = run_stage(stage, t.cluster, Mode::IpaRaaGeneral, cfg);
    const auto path = run_stage(stage, t.cluster, Mode::IpaRaaPath, cfg);
    EXPECT_EQ(general.stage_latency_s, path.stage_latency_s);
    EXPECT_EQ(general.stage_cost, path.stage_cost);
  }
}

TEST(RunStage, NoiseIsReproducibleAndBounded) {
  const auto t = small_workload(5, 5);
  HarnessConfig cfg;
  cfg.noise_sigma = 0.2;
  cfg.seed = 99;
  for (const auto& stage : t.stages) {
    const auto a = run_stage(stage, t.cluster, Mode::Ipa, cfg);
    const auto b = run_stage(stage, t.cluster, Mode::Ipa, cfg);
    for (std::size_t i = 0; i < a.instances.size(); ++i) {
      EXPECT_EQ(a.instances[i].latency_s, b.instances[i].latency_s);
      EXPECT_LE(std::abs(a.instances[i].latency_s / a.instances[i].predicted_latency_s - 1.0), 0.6 + 1e-12);
    }
  }
}

TEST(RunWorkload, ThreadCountDoesNotChangeResults) {
  const auto t = small_workload(6);
  HarnessConfig cfg;
  const auto one = to_json(run_workload(t, Mode::IpaRaaPath, cfg, 1), false);
  const auto many = to_json(run_workload(t, Mode::IpaRaaPath, cfg, 8), false);
  EXPECT_EQ(one.dump(), many.dump());
}

TEST(RunWorkload, TooFewMachinesIsAFailureNotAnError) {
  Traces t;
  t.cluster.machines = {{1, "small", 0.99, 0.99, 1, 1}};
  t.stages = {{7, {{0, 10, 0}}, {1, 4}}};
  const auto r = run_workload(t, Mode::Ipa, HarnessConfig{});
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_EQ(r.failures[0].stage_id, 7);
  EXPECT_NE(r.failures[0].error.find("stage 7"), std::string::npos);
}

TEST(CompareReport, FuxiAgainstItselfHasZeroRates) {
  const auto t = small_workload(8, 10);
  std::map<Mode, std::vector<StageReport>> reports;
  reports[Mode::Fuxi] = run_workload(t, Mode::Fuxi, HarnessConfig{}).reports;
  const auto s = compare_report(reports);
  ASSERT_EQ(s.modes.size(), 1u);
  EXPECT_EQ(s.modes[0].latency_reduction_rate, 0.0);
  EXPECT_EQ(s.modes[0].cost_reduction_rate, 0.0);
  EXPECT_EQ(s.modes[0].dominates_fuxi_fraction, 1.0);
}

TEST(CompareReport, RequiresBaselineAndMatchingStages) {
  const auto t = small_workload(9, 4);
  std::map<Mode, std::vector<StageReport>> reports;
  reports[Mode::Ipa] = run_workload(t, Mode::Ipa, HarnessConfig{}).reports;
  EXPECT_THROW(compare_report(reports), ContractViolation);
  reports[Mode::Fuxi] = run_workload(t, Mode::Fuxi, HarnessConfig{}).reports;
  reports[Mode::Ipa].pop_back();
  EXPECT_THROW(compare_report(reports), ContractViolation);
}

TEST(CompareReport, HandBuiltThreeStageFixture) {
  auto mk = [](std::int64_t id, Mode m, double lat, double cost) {
    StageReport r;
    r.stage_id = id;
    r.mode = m;
    r.stage_latency_s = lat;
    r.stage_cost = cost;
    return r;
  };
  std::map<Mode, std::vector<StageReport>> reports;
  reports[Mode::Fuxi] = {mk(1, Mode::Fuxi, 10, 4), mk(2, Mode::Fuxi, 20, 4), mk(3, Mode::Fuxi, 30, 4)};
  reports[Mode::Ipa] = {mk(1, Mode::Ipa, 5, 4), mk(2, Mode::Ipa, 10, 5), mk(3, Mode::Ipa, 15, 3)};
  const auto s = compare_report(reports);
  const auto& ipa = *std::find_if(s.modes.begin(), s.modes.end(), [](const auto& x) { return x.mode == Mode::Ipa; });
  EXPECT_DOUBLE_EQ(ipa.mean_latency_s, 10.0);
  EXPECT_DOUBLE_EQ(ipa.latency_reduction_rate, 0.5);
  EXPECT_DOUBLE_EQ(ipa.cost_reduction_rate, 0.0);
  EXPECT_DOUBLE_EQ(ipa.dominates_fuxi_fraction, 2.0 / 3.0);
  EXPECT_NE(to_csv(s).find("ipa"), std::string::npos);
}

TEST(HarnessConfig, JsonOverridesAndRejections) {
  HarnessConfig cfg;
  apply_config_json(cfg, json{{"alpha", 3}, {"key_resource", "mem"}, {"cost_weights", {{"mem", 0.5}}}});
  EXPECT_EQ(cfg.alpha, 3);
  EXPECT_EQ(cfg.key_resource, KeyResource::Memory);
  EXPECT_EQ(cfg.cost_weights.mem, 0.5);
  EXPECT_THROW(apply_config_json(cfg, json{{"key_resource", "disk"}}), ConfigError);
  EXPECT_THROW(apply_config_json(cfg, json{{"alpha", "x"}}), ConfigError);
  EXPECT_THROW(parse_mode("fastest"), ConfigError);
  for (Mode m : kAllModes) EXPECT_EQ(parse_mode(to_string(m)), m);
}

}  // namespace
}  // namespace stagesched

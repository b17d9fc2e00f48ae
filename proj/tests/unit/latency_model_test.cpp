#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "stagesched/latency_model.hpp"

namespace stagesched {
namespace {

PredictorParams unit_params() {
  PredictorParams p;
  p.base_seconds_per_row = 0.01;
  p.hw_speed = {{"std", 1.0}, {"fast", 2.0}};
  p.contention_coeff = 1.0;
  p.cpu_exponent = 1.0;
  p.mem_floor_gb = 4.0;
  p.mem_penalty = 0.5;
  return p;
}

TEST(Predict, HandComputedValue) {
  // 0.01 * 1000 / 1 * (1 + 1 * 0.5) / 1^1 * 1 = 15
  const MachineSpec mach{0, "std", 0.5, 0.0, 8.0, 32.0};
  EXPECT_DOUBLE_EQ(predict({0, 1000, 0}, {1.0, 4.0}, mach, unit_params()), 15.0);
}

TEST(Predict, ZeroRowsIsZeroAndMatrixClamps) {
  const MachineSpec mach{0, "std", 0.5, 0.0, 8.0, 32.0};
  EXPECT_EQ(predict({0, 0, 0}, {1.0, 4.0}, mach, unit_params()), 0.0);
  const std::vector<InstanceSpec> inst{{0, 0, 0}};
  const std::vector<MachineSpec> machines{mach};
  const auto L = build_latency_matrix(inst, {1.0, 4.0}, machines, unit_params(), 0.001);
  EXPECT_EQ(L.at(0, 0), 0.001);
}

TEST(Predict, MonotoneInRowsCoresAndUtil) {
  const auto p = unit_params();
  const MachineSpec mach{0, "std", 0.3, 0.0, 8.0, 32.0};
  EXPECT_GT(predict({0, 2000, 0}, {1, 4}, mach, p), predict({1, 1000, 0}, {1, 4}, mach, p));
  EXPECT_LT(predict({0, 1000, 0}, {2, 4}, mach, p), predict({0, 1000, 0}, {1, 4}, mach, p));
  MachineSpec busier = mach;
  busier.cpu_util = 0.9;
  EXPECT_GE(predict({0, 1000, 0}, {1, 4}, busier, p), predict({0, 1000, 0}, {1, 4}, mach, p));
  // memory below the floor is penalised
  EXPECT_GT(predict({0, 1000, 0}, {1, 2}, mach, p), predict({0, 1000, 0}, {1, 4}, mach, p));
}

TEST(Predict, UnknownHardwareClassIsConfigError) {
  const MachineSpec mach{0, "gpu", 0.3, 0.0, 8.0, 32.0};
  EXPECT_THROW(predict({0, 10, 0}, {1, 4}, mach, unit_params()), ConfigError);
}

TEST(BuildLatencyMatrix, SingleCellAndIdenticalMachines) {
  const std::vector<InstanceSpec> one{{0, 100, 0}};
  const std::vector<MachineSpec> m1{{0, "std", 0.1, 0.1, 8, 32}};
  EXPECT_EQ(build_latency_matrix(one, {1, 4}, m1, unit_params()).rows(), 1u);

  const std::vector<InstanceSpec> inst{{0, 100, 0}, {1, 500, 0}, {2, 300, 0}};
  const std::vector<MachineSpec> same{{0, "std", 0.2, 0.1, 8, 32}, {1, "std", 0.2, 0.1, 8, 32}};
  const auto L = build_latency_matrix(inst, {1, 4}, same, unit_params());
  for (std::size_t i = 0; i < L.rows(); ++i) EXPECT_EQ(L.at(i, 0), L.at(i, 1));
}

std::vector<std::size_t> argsort_column(const LatencyMatrix& L, std::size_t j) {
  std::vector<std::size_t> idx(L.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return L.at(a, j) < L.at(b, j); });
  return idx;
}

TEST(BuildLatencyMatrix, ColumnOrderHoldsOnRandomWorkloads) {
  std::mt19937_64 rng(42);
  PredictorParams p;  // default classes
  const std::vector<std::string> classes{"small", "medium", "large"};
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = std::uniform_int_distribution<std::size_t>(2, 30)(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 20)(rng);
    std::vector<InstanceSpec> inst;
    std::vector<std::int64_t> rows(5000);
    std::iota(rows.begin(), rows.end(), 1);
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t i = 0; i < m; ++i) inst.push_back({std::int64_t(i), rows[i] * 100, 0});
    std::vector<MachineSpec> machines;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t j = 0; j < n; ++j) machines.push_back({std::int64_t(j), classes[j % 3], u(rng), u(rng), 32, 128});
    const auto L = build_latency_matrix(inst, {1, 4}, machines, p);
    const auto ref = argsort_column(L, 0);
    for (std::size_t j = 1; j < n; ++j) ASSERT_EQ(argsort_column(L, j), ref) << "trial " << trial;
  }
}

TEST(SampleActual, ZeroSigmaIsExact) { EXPECT_EQ(sample_actual(10.0, {0.0, 99}, 3), 10.0); }

TEST(SampleActual, TruncatedToThreeSigma) {
  const NoiseParams noise{0.1, 7};
  for (std::uint64_t k = 0; k < 5000; ++k) {
    const double x = sample_actual(10.0, noise, k);
    EXPECT_GE(x, 7.0);
    EXPECT_LE(x, 13.0);
  }
}

TEST(SampleActual, DeterministicPerSeedAndIndex) {
  NoiseSampler a({0.2, 11}), b({0.2, 11});
  for (int k = 0; k < 50; ++k) EXPECT_EQ(a(5.0), b(5.0));
  EXPECT_EQ(sample_actual(5.0, {0.2, 11}, 4), sample_actual(5.0, {0.2, 11}, 4));
  EXPECT_NE(sample_actual(5.0, {0.2, 11}, 4), sample_actual(5.0, {0.2, 12}, 4));
}

TEST(SampleActual, RejectsOutOfRangeSigma) {
  EXPECT_THROW(sample_actual(1.0, {0.34, 1}, 0), ConfigError);
  EXPECT_THROW(NoiseSampler({-0.1, 1}), ConfigError);
}

}  // namespace
}  // namespace stagesched

// stagesched: generate workloads, solve stages per scheduling mode, compare modes,
// and cross-check the solvers against the exhaustive oracles.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "stagesched/harness.hpp"
#include "stagesched/oracle.hpp"
#include "stagesched/random_problems.hpp"
#include "stagesched/traces.hpp"

namespace {

using namespace stagesched;

struct SolveOptions {
  std::string stages;
  std::string machines;
  std::string config;
  std::string grid;
  std::string out;
  std::string csv;
  std::string mode = "ipa";
  std::vector<std::string> modes;
  std::optional<int> alpha;
  std::optional<int> buckets;
  std::optional<std::string> wun_weights;
  std::optional<double> noise_sigma;
  std::optional<std::uint64_t> seed;
  std::optional<bool> timing;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
};

void add_solver_flags(CLI::App* cmd, SolveOptions& o) {
  cmd->add_option("--stages", o.stages, "Stages trace (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--machines", o.machines, "Machines trace (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--config", o.config, "Harness config (JSON); flags override it")->check(CLI::ExistingFile);
  cmd->add_option("--grid", o.grid, "Resource grid (JSON with cpu_choices / mem_choices)")->check(CLI::ExistingFile);
  cmd->add_option("--alpha", o.alpha, "Max instances per machine");
  cmd->add_option("--buckets", o.buckets, "Utilisation discretisation degree for machine clustering");
  cmd->add_option("--wun-weights", o.wun_weights, "WUN weights as latency,cost");
  cmd->add_option("--noise-sigma", o.noise_sigma, "Relative sigma of simulated latency noise");
  cmd->add_option("--seed", o.seed, "Noise seed");
  cmd->add_option("--out", o.out, "Output path (stdout when omitted)");
  cmd->add_option("--threads", o.threads, "Worker threads");
  cmd->add_flag("--timing,!--no-timing", o.timing, "Include wall-clock solve times in the output");
}

HarnessConfig build_config(const SolveOptions& o) {
  HarnessConfig cfg;
  if (!o.config.empty()) apply_config_json(cfg, detail::read_json_file(o.config));
  if (!o.grid.empty()) cfg.grid = load_grid(o.grid);
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.buckets) cfg.cluster.buckets = *o.buckets;
  if (o.noise_sigma) cfg.noise_sigma = *o.noise_sigma;
  if (o.seed) cfg.seed = *o.seed;
  if (o.wun_weights) {
    std::vector<double> w;
    std::stringstream ss(*o.wun_weights);
    for (std::string tok; std::getline(ss, tok, ',');) w.push_back(std::stod(tok));
    cfg.wun_weights = w;
  }
  cfg.validate();
  return cfg;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty())
    std::cout << text;
  else
    detail::write_text_file(path, text);
}

int run_solve(const SolveOptions& o) {
  const auto cfg = build_config(o);
  const auto traces = load_traces(o.stages, o.machines);
  const auto result = run_workload(traces, parse_mode(o.mode), cfg, o.threads);
  emit(o.out, to_json(result, o.timing.value_or(false)).dump(2) + "\n");
  for (const auto& f : result.failures) std::cerr << "no solution: " << f.error << "\n";
  return result.failures.empty() ? 0 : 2;
}

int run_compare(const SolveOptions& o) {
  const auto cfg = build_config(o);
  const auto traces = load_traces(o.stages, o.machines);
  std::vector<Mode> modes;
  for (const auto& m : o.modes) modes.push_back(parse_mode(m));
  if (modes.empty()) modes.assign(std::begin(kAllModes), std::end(kAllModes));
  if (std::find(modes.begin(), modes.end(), Mode::Fuxi) == modes.end()) modes.insert(modes.begin(), Mode::Fuxi);

  std::map<Mode, WorkloadResult> results;
  std::set<std::int64_t> failed;
  for (Mode m : modes) {
    results[m] = run_workload(traces, m, cfg, o.threads);
    for (const auto& f : results[m].failures) {
      failed.insert(f.stage_id);
      std::cerr << "no solution (" << to_string(m) << "): " << f.error << "\n";
    }
  }
  // Compare only stages every mode solved.
  std::map<Mode, std::vector<StageReport>> reports;
  for (auto& [m, r] : results)
    for (auto& s : r.reports)
      if (!failed.count(s.stage_id)) reports[m].push_back(std::move(s));
  const auto summary = compare_report(reports);
  auto doc = to_json(summary);
  doc["excluded_stages"] = failed.size();
  if (!o.timing.value_or(true)) {
    for (auto& m : doc["modes"]) {
      m.erase("mean_solve_ms");
      m.erase("max_solve_ms");
      m.erase("mean_latency_in_s");
    }
  }
  emit(o.out, doc.dump(2) + "\n");
  std::string csv_path = o.csv;
  if (csv_path.empty() && !o.out.empty()) csv_path = std::filesystem::path(o.out).replace_extension(".csv").string();
  if (!csv_path.empty()) detail::write_text_file(csv_path, to_csv(summary));
  return failed.empty() ? 0 : 2;
}

int run_generate(const WorkloadParams& p, const std::string& stages, const std::string& machines) {
  save_traces(generate_workload(p), stages, machines);
  std::cout << "wrote " << p.n_stages << " stages to " << stages << " and " << p.n_machines << " machines to "
            << machines << "\n";
  return 0;
}

int run_oracle_check(std::uint64_t seed, int trials) {
  random::Rng rng(seed);
  bool ok = true;
  auto report = [&](const std::string& name, int failures, int total) {
    std::cout << (failures == 0 ? "[PASS] " : "[FAIL] ") << name << " (" << total - failures << "/" << total << ")\n";
    ok = ok && failures == 0;
  };

  int bad = 0;
  for (int t = 0; t < trials; ++t) {
    const auto m = random::uniform_size(rng, 2, 7);
    const auto n = random::uniform_size(rng, m, 9);
    const auto L = random::column_order_matrix(rng, m, n);
    const auto beta = random::mixed_beta(rng, n, m);
    if (stage_latency(ipa_place(L, beta), L) != oracle::brute_force_placement(L, beta).max_latency) ++bad;
  }
  report("ipa matches exhaustive placement optimum", bad, trials);

  bad = 0;
  for (int t = 0; t < trials; ++t) {
    const auto problem = random::hierarchical_problem(rng, {});
    const auto truth = oracle::brute_force_stage_pareto(problem.instances, problem.agg);
    for (const auto& p : general_hierarchical_moo(problem)) {
      if (std::none_of(truth.begin(), truth.end(), [&](const auto& q) { return q.objectives == p.objectives; })) {
        ++bad;
        break;
      }
    }
  }
  report("hierarchical solutions are stage-level Pareto optimal", bad, trials);

  bad = 0;
  for (int t = 0; t < trials; ++t) {
    const auto problem = random::latency_cost_problem(rng, 5, 5);
    const auto truth = oracle::brute_force_stage_pareto(problem.instances, problem.agg);
    const auto path = raa_path(problem).points();
    bool same = truth.size() == path.size();
    for (std::size_t k = 0; same && k < truth.size(); ++k)
      same = truth[k].objectives == path[k].objectives && truth[k].state == path[k].state;
    if (!same) ++bad;
  }
  report("path walk enumerates the exact stage Pareto set", bad, trials);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latency-aware instance placement and stage-level resource assignment"};
  app.require_subcommand(1);

  SolveOptions solve_opts;
  auto* solve = app.add_subcommand("solve", "Solve every stage with one scheduling mode and write a JSON report");
  add_solver_flags(solve, solve_opts);
  solve->add_option("--mode", solve_opts.mode, "fuxi|ipa|ipa-clustered|ipa-raa-general|ipa-raa-path");

  SolveOptions compare_opts;
  auto* compare = app.add_subcommand("compare", "Run several modes and summarise them against the fuxi baseline");
  add_solver_flags(compare, compare_opts);
  compare->add_option("--modes", compare_opts.modes, "Modes to compare (default: all)");
  compare->add_option("--csv", compare_opts.csv, "CSV summary path (default: --out with .csv)");

  WorkloadParams gen;
  std::string gen_stages = "stages.json", gen_machines = "machines.json";
  auto* generate = app.add_subcommand("generate", "Write a synthetic stage/machine workload");
  generate->add_option("--seed", gen.seed, "Generator seed");
  generate->add_option("--n-stages", gen.n_stages, "Number of stages");
  generate->add_option("--m-min", gen.m_min, "Minimum instances per stage");
  generate->add_option("--m-max", gen.m_max, "Maximum instances per stage");
  generate->add_option("--n-machines", gen.n_machines, "Number of machines");
  generate->add_option("--skew", gen.skew, "Zipf exponent for input rows (0 = uniform)");
  generate->add_option("--stages", gen_stages, "Output stages path");
  generate->add_option("--machines", gen_machines, "Output machines path");

  std::uint64_t oracle_seed = 1;
  int oracle_trials = 200;
  auto* oracle_check = app.add_subcommand("oracle-check", "Cross-check solvers against exhaustive oracles");
  oracle_check->add_option("--seed", oracle_seed, "RNG seed");
  oracle_check->add_option("--trials", oracle_trials, "Random problems per check");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*solve) return run_solve(solve_opts);
    if (*compare) return run_compare(compare_opts);
    if (*generate) return run_generate(gen, gen_stages, gen_machines);
    if (*oracle_check) return run_oracle_check(oracle_seed, oracle_trials);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

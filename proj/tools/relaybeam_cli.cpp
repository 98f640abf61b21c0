// relaybeam: simulate mobile relay beamforming campaigns and run oracle suites.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relaybeam/config.hpp"
#include "relaybeam/harness.hpp"
#include "relaybeam/results_io.hpp"
#include "relaybeam/validation.hpp"

namespace {

int run_simulate(const std::string& config_path, const std::vector<std::string>& policies,
                 int trials, long long seed, const std::string& out_dir, bool debug_jensen,
                 bool trajectories) {
  relaybeam::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = relaybeam::load_config(config_path);
  if (!policies.empty()) {
    cfg.policies.clear();
    for (const auto& p : policies) cfg.policies.push_back(relaybeam::parse_policy(p));
  }
  if (trials > 0) cfg.trials = trials;
  if (seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(seed);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (debug_jensen) cfg.debug_jensen = true;
  if (trajectories) cfg.write_trajectories = true;
  cfg.validate();

  const relaybeam::ExperimentResult result = relaybeam::run_experiment(cfg);
  const auto paths = relaybeam::default_output_paths(cfg.output_dir, cfg.write_trajectories);
  relaybeam::emit_results(cfg, result, paths);

  std::printf("%-12s %8s %14s %16s %12s %14s\n", "policy", "slots", "mean_V", "mean_power",
              "feasible", "mean_best_E");
  for (const auto& agg : result.aggregates) {
    std::printf("%-12s %8zu %14.6g %16.6g %12.4f %14.6g\n",
                std::string(relaybeam::policy_name(agg.policy)).c_str(), agg.slots,
                agg.mean_value_V, agg.mean_relay_power, agg.feasibility_rate, agg.mean_best_E);
  }
  int jensen_failed = 0;
  for (const auto& c : result.jensen_checks) jensen_failed += c.pass ? 0 : 1;
  if (!result.jensen_checks.empty()) {
    std::printf("jensen checks: %zu run, %d failed\n", result.jensen_checks.size(), jensen_failed);
  }
  for (const auto& f : result.failures) {
    std::fprintf(stderr, "trial failed (%s, trial %d): %s\n",
                 std::string(relaybeam::policy_name(f.policy)).c_str(), f.trial, f.message.c_str());
  }
  std::printf("wrote %s, %s (%.2f s)\n", paths.slots_csv.c_str(), paths.summary_json.c_str(),
              result.wall_time);
  return result.failures.empty() ? 0 : 2;
}

int run_validate(const std::string& suite) {
  std::vector<relaybeam::validation::SuiteReport> reports;
  if (suite == "moments" || suite == "all") reports.push_back(relaybeam::validation::run_moments_suite());
  if (suite == "eigen" || suite == "all") reports.push_back(relaybeam::validation::run_eigen_suite());
  if (suite == "jensen" || suite == "all") reports.push_back(relaybeam::validation::run_jensen_suite());
  bool ok = true;
  for (const auto& r : reports) {
    r.print(std::cout);
    ok = ok && r.pass();
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatially controlled relay beamforming simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> policies;
  int trials = 0;
  long long seed = -1;
  std::string out_dir;
  bool debug_jensen = false;
  bool trajectories = false;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo campaign");
  simulate->add_option("--config", config_path, "Experiment config file (key = value)")
      ->check(CLI::ExistingFile);
  simulate->add_option("--policy", policies, "Policy to run (repeatable)")
      ->check(CLI::IsMember({"selective", "static", "random_walk", "move_all"}));
  simulate->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", seed, "Master seed")->check(CLI::NonNegativeNumber);
  simulate->add_option("--out", out_dir, "Output directory");
  simulate->add_flag("--debug-jensen", debug_jensen, "Run conditional Monte Carlo relaxation checks");
  simulate->add_flag("--trajectories", trajectories, "Also write trajectories.csv");

  std::string suite = "all";
  auto* validate = app.add_subcommand("validate", "Run oracle suites");
  validate->add_option("--suite", suite, "Suite to run")
      ->check(CLI::IsMember({"moments", "eigen", "jensen", "all"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      return run_simulate(config_path, policies, trials, seed, out_dir, debug_jensen, trajectories);
    }
    return run_validate(suite);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

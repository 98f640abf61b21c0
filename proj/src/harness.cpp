#include "relaybeam/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace relaybeam {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

void ExperimentConfig::validate() const {
  channel.validate();
  geometry.validate();
  search.validate();
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (policies.empty()) throw std::invalid_argument("config: at least one policy required");
  for (std::size_t i = 0; i < policies.size(); ++i) {
    for (std::size_t j = i + 1; j < policies.size(); ++j) {
      if (policies[i] == policies[j]) throw std::invalid_argument("config: duplicate policy");
    }
  }
  if (history_window && *history_window < 1) {
    throw std::invalid_argument("config: history_window must be >= 1");
  }
  if (jensen_samples < 2) throw std::invalid_argument("config: jensen_samples must be >= 2");
}

JensenCheck jensen_check(const FieldHistory& history, const std::vector<Point>& positions,
                         double relaxed, int samples, Rng& rng) {
  const int r = history.num_relays();
  const ConditionalLaw law = history.conditional_law(positions);
  const ChannelParams& params = history.params();

  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
  Eigen::VectorXd eps(2 * r);
  SlotChannels ch;
  ch.f.resize(r);
  ch.g.resize(r);

  double sum = 0.0;
  double sum_sq = 0.0;
  for (int s = 0; s < samples; ++s) {
    for (int k = 0; k < 2 * r; ++k) eps(k) = normal(rng);
    const Eigen::VectorXd x = law.mean + law.chol * eps;
    for (int i = 0; i < r; ++i) {
      const double f_mag = std::pow(10.0, (x(i) + params.fading_mean_db) / 20.0);
      const double g_mag = std::pow(10.0, (x(r + i) + params.fading_mean_db) / 20.0);
      ch.f(i) = std::polar(f_mag, phase(rng));
      ch.g(i) = std::polar(g_mag, phase(rng));
    }
    const double lambda = solve_second_stage(ch, params).lambda_max;
    sum += lambda;
    sum_sq += lambda * lambda;
  }
  JensenCheck out;
  out.relaxed = relaxed;
  out.mc_mean = sum / samples;
  const double var = std::max(0.0, (sum_sq - samples * out.mc_mean * out.mc_mean) / (samples - 1));
  out.mc_stderr = std::sqrt(var / samples);
  out.pass = out.relaxed <= out.mc_mean + 3.0 * out.mc_stderr;
  return out;
}

TrialRunner::TrialRunner(const ExperimentConfig& config, Policy policy, int trial)
    : config_(config),
      policy_(policy),
      trial_(trial),
      history_(config.channel, config.geometry, config.history_window),
      positions_(config.geometry.initial_positions) {}

SlotRecord TrialRunner::run_slot() {
  const int slot = next_slot();
  try {
    return run_slot_unchecked();
  } catch (const std::exception& e) {
    throw std::runtime_error("trial " + std::to_string(trial_) + ", slot " +
                             std::to_string(slot) + ": " + e.what());
  }
}

SlotRecord TrialRunner::run_slot_unchecked() {
  const auto start = Clock::now();
  const int slot = next_slot();
  const NetworkGeometry& geometry = config_.geometry;
  if (slot > geometry.num_slots) throw std::logic_error("all slots already simulated");

  // Channels at the current positions, conditioned on everything observed so far.
  const auto tag_it = tag_overrides_.find(slot);
  const std::uint64_t tag = tag_it != tag_overrides_.end()
                                ? tag_it->second
                                : static_cast<std::uint64_t>(StreamPurpose::kField);
  Rng field_rng(stream_id(config_.master_seed, static_cast<std::uint64_t>(trial_),
                          static_cast<std::uint64_t>(slot), tag));
  const SlotBlock block = sample_next_slot(history_, positions_, field_rng);

  const auto gains = to_complex_gains(block, config_.channel);
  beam_ = solve_second_stage(SlotChannels::from_gains(gains), config_.channel);

  // Positions for slot + 1 from the causal history, which now includes this slot.
  const HistoryContext ctx = HistoryContext::from(history_);
  ControlState state;
  state.positions = positions_;
  state.ctx = &ctx;
  state.region = geometry.region;
  state.radius = geometry.step_radius();
  state.dt = geometry.slot_move_interval;
  state.search = config_.search;
  Rng motion_rng = make_stream(config_.master_seed, static_cast<std::uint64_t>(trial_),
                               static_cast<std::uint64_t>(slot), StreamPurpose::kMotion);
  decision_ = policy_step(policy_, state, motion_rng);

  if (config_.debug_jensen && trial_ < config_.jensen_trials && slot <= config_.jensen_slots) {
    Rng mc_rng = make_stream(config_.master_seed, static_cast<std::uint64_t>(trial_),
                             static_cast<std::uint64_t>(slot), StreamPurpose::kJensen);
    JensenCheck check =
        jensen_check(history_, decision_.targets, decision_.best_E, config_.jensen_samples, mc_rng);
    check.trial = trial_;
    check.slot = slot;
    check.policy = policy_;
    jensen_.push_back(check);
  }

  SlotRecord rec;
  rec.trial = trial_;
  rec.slot = slot;
  rec.policy = policy_;
  rec.positions = positions_;
  rec.value_V = beam_.value_V;
  rec.relay_power = beam_.relay_power;
  rec.sinr = beam_.achieved_sinr;
  rec.feasible = beam_.feasible;
  rec.chosen_relay = decision_.chosen_relay;
  rec.best_E = decision_.best_E;
  rec.stay_E = decision_.stay_E;
  rec.targets = decision_.targets;
  rec.velocities = decision_.velocities;

  // Constant velocity over the move interval lands exactly on the target.
  positions_ = decision_.targets;
  rec.wall_time = seconds_since(start);
  return rec;
}

PolicyAggregate aggregate(Policy policy, std::vector<SlotRecord> records) {
  std::sort(records.begin(), records.end(), [](const SlotRecord& a, const SlotRecord& b) {
    return a.trial != b.trial ? a.trial < b.trial : a.slot < b.slot;
  });
  PolicyAggregate agg;
  agg.policy = policy;
  agg.slots = records.size();
  if (records.empty()) return agg;
  double sum_v = 0.0;
  double sum_power = 0.0;
  double sum_best = 0.0;
  std::size_t feasible = 0;
  for (const auto& rec : records) {
    sum_v += rec.value_V;
    sum_best += rec.best_E;
    if (rec.feasible) {
      ++feasible;
      sum_power += rec.relay_power;
    }
  }
  const double n = static_cast<double>(records.size());
  agg.mean_value_V = sum_v / n;
  agg.mean_best_E = sum_best / n;
  agg.feasibility_rate = static_cast<double>(feasible) / n;
  agg.mean_relay_power = feasible > 0 ? sum_power / static_cast<double>(feasible) : 0.0;
  return agg;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto start = Clock::now();

  struct Job {
    Policy policy;
    int trial;
    std::vector<SlotRecord> records;
    std::vector<JensenCheck> jensen;
    std::optional<std::string> error;
  };
  std::vector<Job> jobs;
  for (Policy policy : config.policies) {
    for (int trial = 0; trial < config.trials; ++trial) jobs.push_back({policy, trial, {}, {}, {}});
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      Job& job = jobs[j];
      try {
        TrialRunner runner(config, job.policy, job.trial);
        for (int t = 1; t <= config.geometry.num_slots; ++t) job.records.push_back(runner.run_slot());
        job.jensen = runner.jensen_checks();
      } catch (const std::exception& e) {
        job.error = e.what();
        job.records.clear();
      }
    }
  };
  unsigned threads = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(jobs.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
    worker();
  }

  ExperimentResult result;
  for (Policy policy : config.policies) {
    std::vector<SlotRecord> mine;
    int failed = 0;
    for (auto& job : jobs) {
      if (job.policy != policy) continue;
      if (job.error) {
        ++failed;
        result.failures.push_back({policy, job.trial, *job.error});
        continue;
      }
      mine.insert(mine.end(), job.records.begin(), job.records.end());
      result.jensen_checks.insert(result.jensen_checks.end(), job.jensen.begin(), job.jensen.end());
    }
    result.records.insert(result.records.end(), mine.begin(), mine.end());
    PolicyAggregate agg = aggregate(policy, std::move(mine));
    agg.failed_trials = failed;
    result.aggregates.push_back(agg);
  }
  result.wall_time = seconds_since(start);
  return result;
}

}  // namespace relaybeam

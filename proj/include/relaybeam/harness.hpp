#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relaybeam/beamformer.hpp"
#include "relaybeam/channel_field.hpp"
#include "relaybeam/controller.hpp"
#include "relaybeam/posterior.hpp"

namespace relaybeam {

struct ExperimentConfig {
  ChannelParams channel;
  NetworkGeometry geometry;
  std::vector<Policy> policies{Policy::kSelective, Policy::kStatic, Policy::kRandomWalk,
                               Policy::kMoveAll};
  int trials = 200;
  std::uint64_t master_seed = 20140601;
  std::optional<int> history_window;  // nullopt: condition on the full history
  SearchOptions search;
  std::string output_dir = "results";
  bool write_trajectories = false;

  bool debug_jensen = false;
  int jensen_trials = 1;  // trials 0 .. jensen_trials-1 are checked
  int jensen_slots = 3;   // slots 1 .. jensen_slots are checked
  int jensen_samples = 10000;

  unsigned threads = 0;  // 0: hardware concurrency

  void validate() const;
};

struct SlotRecord {
  int trial = 0;  // 0-based
  int slot = 0;   // 1-based
  Policy policy = Policy::kStatic;
  std::vector<Point> positions;  // where the slot's channels were observed
  double value_V = 0.0;
  double relay_power = 0.0;
  double sinr = 0.0;
  bool feasible = false;
  int chosen_relay = 0;
  double best_E = 0.0;
  // In-memory only; not part of the slot CSV.
  double stay_E = 0.0;
  std::vector<Point> targets;
  std::vector<Eigen::Vector2d> velocities;
  double wall_time = 0.0;
};

/// Debug-mode comparison of the relaxed objective with a Monte Carlo estimate
/// of the unrelaxed one at the positions chosen for the next slot.
struct JensenCheck {
  int trial = 0;
  int slot = 0;
  Policy policy = Policy::kStatic;
  double relaxed = 0.0;  // lambda_max(E{B | history}) = max_i E_i
  double mc_mean = 0.0;  // estimate of E{lambda_max(B) | history}
  double mc_stderr = 0.0;
  bool pass = false;
};

JensenCheck jensen_check(const FieldHistory& history, const std::vector<Point>& positions,
                         double relaxed, int samples, Rng& rng);

/// One Monte Carlo trial of one policy, advanced slot by slot.
class TrialRunner {
 public:
  TrialRunner(const ExperimentConfig& config, Policy policy, int trial);

  /// Observe CSI at the current positions, beamform, decide and apply motion.
  SlotRecord run_slot();

  int next_slot() const { return history_.num_slots() + 1; }
  const FieldHistory& history() const { return history_; }
  const std::vector<Point>& positions() const { return positions_; }
  const ControlDecision& last_decision() const { return decision_; }
  const BeamSolution& last_beam() const { return beam_; }
  const std::vector<JensenCheck>& jensen_checks() const { return jensen_; }

  /// Replaces the field-stream purpose tag of one slot (seed surgery for causality tests).
  void override_field_tag(int slot, std::uint64_t tag) { tag_overrides_[slot] = tag; }

 private:
  SlotRecord run_slot_unchecked();

  const ExperimentConfig& config_;
  Policy policy_;
  int trial_;
  FieldHistory history_;
  std::vector<Point> positions_;
  ControlDecision decision_;
  BeamSolution beam_;
  std::vector<JensenCheck> jensen_;
  std::map<int, std::uint64_t> tag_overrides_;
};

struct PolicyAggregate {
  Policy policy = Policy::kStatic;
  std::size_t slots = 0;
  double mean_value_V = 0.0;
  double mean_relay_power = 0.0;  // feasible slots only
  double feasibility_rate = 0.0;
  double mean_best_E = 0.0;
  int failed_trials = 0;
};

struct TrialFailure {
  Policy policy = Policy::kStatic;
  int trial = 0;
  std::string message;
};

struct ExperimentResult {
  std::vector<SlotRecord> records;  // ordered by policy (config order), trial, slot
  std::vector<PolicyAggregate> aggregates;
  std::vector<JensenCheck> jensen_checks;
  std::vector<TrialFailure> failures;
  double wall_time = 0.0;
};

/// Aggregate over the records of one policy; order-independent.
PolicyAggregate aggregate(Policy policy, std::vector<SlotRecord> records);

ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace relaybeam

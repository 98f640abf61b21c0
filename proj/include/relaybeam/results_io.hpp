#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "relaybeam/harness.hpp"

namespace relaybeam {

inline constexpr const char* kSlotCsvHeader =
    "trial,slot,policy,relay,x,y,value_V,relay_power,sinr,feasible,chosen_relay,best_E";

/// One row per (record, relay); doubles with 17 significant digits.
void write_slot_csv(std::ostream& out, const std::vector<SlotRecord>& records);
/// Inverse of write_slot_csv for the CSV columns (in-memory-only fields stay default).
std::vector<SlotRecord> read_slot_csv(std::istream& in);

void write_trajectory_csv(std::ostream& out, const std::vector<SlotRecord>& records);
void write_summary_json(std::ostream& out, const ExperimentConfig& config,
                        const ExperimentResult& result);

struct OutputPaths {
  std::string slots_csv;
  std::string summary_json;
  std::string trajectories_csv;  // empty: not written
};

OutputPaths default_output_paths(const std::string& dir, bool trajectories);

/// Writes the result files, creating the directory if needed. Throws
/// std::runtime_error naming the path on failure.
void emit_results(const ExperimentConfig& config, const ExperimentResult& result,
                  const OutputPaths& paths);

}  // namespace relaybeam

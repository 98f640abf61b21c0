#pragma once

#include <iosfwd>
#include <string>

#include "relaybeam/harness.hpp"

namespace relaybeam {

/// Parses the flat `key = value` experiment format. Blank lines and `#` comments
/// are ignored; unknown keys and malformed values throw std::invalid_argument
/// with the offending line number. Keys not present keep their defaults.
///
///   channel:   path_loss_exponent wavelength shadow_power corr_distance corr_time
///              bs_correlation fading_var fading_mean_db relay_noise_power
///              dest_noise_power source_power sinr_threshold
///   geometry:  region = x0, y0, x1, y1      source = x, y      destination = x, y
///              num_relays   initial_positions = x, y; x, y; ...
///              num_slots    slot_move_interval    max_speed
///   campaign:  policies = selective, static, random_walk, move_all
///              trials  master_seed  history_window (integer or "inf")
///              search_radii  search_angles  refine_rounds  search_shrink
///              output_dir  write_trajectories  threads
///              debug_jensen  jensen_trials  jensen_slots  jensen_samples
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

}  // namespace relaybeam

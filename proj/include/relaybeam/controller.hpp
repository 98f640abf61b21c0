#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "relaybeam/geometry.hpp"
#include "relaybeam/posterior.hpp"
#include "relaybeam/rng.hpp"

namespace relaybeam {

/// Disk of radius `radius` around `center`, intersected with `clip`.
struct FeasibleRegion {
  Point center{0.0, 0.0};
  double radius = 0.0;
  Rect clip;

  bool contains(const Point& p, double tol = 1e-9) const {
    return distance(p, center) <= radius + tol && clip.contains(p, tol);
  }
  /// Radial projection onto the disk followed by clamping to the clip rectangle.
  /// Clamping toward a rectangle that holds the center never leaves the disk.
  Point project(const Point& p) const;
  void validate() const;
};

struct SearchOptions {
  int radii = 8;
  int angles = 16;
  int refine_rounds = 3;
  double shrink = 3.0;

  void validate() const;
};

struct CandidateResult {
  Point point{0.0, 0.0};
  double value = 0.0;
};

/// Coarse-grid spacing that the first refinement round subdivides.
double refinement_cell(double radius, const SearchOptions& options);

/// Deterministic 2D maximization of objective_E over the feasible region:
/// polar grid plus center, then local grid refinement around the incumbent.
CandidateResult inner_max(const FeasibleRegion& region, const HistoryContext& ctx,
                          const SearchOptions& options = {});

/// 1-based index of the largest value; ties go to the lowest index.
int select_relay(std::span<const CandidateResult> per_relay);

/// Constant velocity reaching `target` from `current` in `dt`, (x, y) order.
Eigen::Vector2d motion_command(const Point& target, const Point& current, double dt);

enum class Policy { kSelective, kStatic, kRandomWalk, kMoveAll };

std::string_view policy_name(Policy policy);
/// Throws std::invalid_argument on unknown names.
Policy parse_policy(std::string_view name);

struct ControlDecision {
  int chosen_relay = 0;  // 1-based; 0 when the policy selects no single relay
  std::vector<Point> targets;
  std::vector<CandidateResult> per_relay_best;
  std::vector<Eigen::Vector2d> velocities;
  std::vector<double> stay_values;  // objective_E at the current positions
  double best_E = 0.0;              // max_i objective_E(target_i)
  double stay_E = 0.0;              // max_i objective_E(current_i)

  const Point& target() const { return targets.at(chosen_relay > 0 ? chosen_relay - 1 : 0); }
};

struct ControlState {
  std::span<const Point> positions;
  const HistoryContext* ctx = nullptr;
  Rect region;
  double radius = 0.0;
  double dt = 1.0;
  SearchOptions search;
};

Point sample_uniform(const FeasibleRegion& region, Rng& rng);

ControlDecision policy_step(Policy policy, const ControlState& state, Rng& rng);

}  // namespace relaybeam

#include "relaybeam/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace relaybeam {

namespace {

// Larger value wins; exact ties go to the lexicographically smaller point.
bool better(const CandidateResult& a, const CandidateResult& b) {
  if (a.value != b.value) return a.value > b.value;
  if (a.point.x() != b.point.x()) return a.point.x() < b.point.x();
  return a.point.y() < b.point.y();
}

}  // namespace

Point FeasibleRegion::project(const Point& p) const {
  Point q = p;
  const double d = distance(p, center);
  if (d > radius) q = center + (p - center) * (radius / d);
  return clip.clamp(q);
}

void FeasibleRegion::validate() const {
  if (!(radius >= 0.0)) throw std::invalid_argument("feasible region: negative radius");
  if (!clip.contains(center)) throw std::invalid_argument("feasible region: center outside clip");
}

void SearchOptions::validate() const {
  if (radii < 1 || angles < 1 || refine_rounds < 0 || !(shrink > 1.0)) {
    throw std::invalid_argument("search options: need radii, angles >= 1, rounds >= 0, shrink > 1");
  }
}

CandidateResult inner_max(const FeasibleRegion& region, const HistoryContext& ctx,
                          const SearchOptions& options) {
  region.validate();
  options.validate();

  CandidateResult best{region.center, objective_E(region.center, ctx)};
  if (region.radius == 0.0) return best;

  auto consider = [&](const Point& raw) {
    const Point p = region.project(raw);
    const CandidateResult cand{p, objective_E(p, ctx)};
    if (better(cand, best)) best = cand;
  };

  for (int k = 1; k <= options.radii; ++k) {
    const double rho = region.radius * k / options.radii;
    for (int j = 0; j < options.angles; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / options.angles;
      consider(region.center + rho * Point(std::cos(theta), std::sin(theta)));
    }
  }

  // Start from the coarser of the radial and outer-ring angular spacings so the first
  // refinement window reaches every point between coarse candidates.
  double step = refinement_cell(region.radius, options);
  constexpr int kHalfWidth = 3;
  for (int round = 0; round < options.refine_rounds; ++round) {
    step /= options.shrink;
    const Point anchor = best.point;
    for (int ix = -kHalfWidth; ix <= kHalfWidth; ++ix) {
      for (int iy = -kHalfWidth; iy <= kHalfWidth; ++iy) {
        if (ix == 0 && iy == 0) continue;
        consider(anchor + step * Point(ix, iy));
      }
    }
  }
  return best;
}

double refinement_cell(double radius, const SearchOptions& options) {
  return radius * std::max(1.0 / options.radii, 2.0 * std::numbers::pi / options.angles);
}

int select_relay(std::span<const CandidateResult> per_relay) {
  if (per_relay.empty()) throw std::invalid_argument("select_relay: no relays");
  std::size_t best = 0;
  for (std::size_t i = 1; i < per_relay.size(); ++i) {
    if (per_relay[i].value > per_relay[best].value) best = i;
  }
  return static_cast<int>(best) + 1;
}

Eigen::Vector2d motion_command(const Point& target, const Point& current, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("motion_command: dt must be > 0");
  return (target - current) / dt;
}

std::string_view policy_name(Policy policy) {
  switch (policy) {
    case Policy::kSelective: return "selective";
    case Policy::kStatic: return "static";
    case Policy::kRandomWalk: return "random_walk";
    case Policy::kMoveAll: return "move_all";
  }
  return "unknown";
}

Policy parse_policy(std::string_view name) {
  if (name == "selective") return Policy::kSelective;
  if (name == "static") return Policy::kStatic;
  if (name == "random_walk") return Policy::kRandomWalk;
  if (name == "move_all") return Policy::kMoveAll;
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

Point sample_uniform(const FeasibleRegion& region, Rng& rng) {
  if (region.radius == 0.0) return region.center;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const double rho = region.radius * std::sqrt(unit(rng));
    const double theta = 2.0 * std::numbers::pi * unit(rng);
    const Point p = region.center + rho * Point(std::cos(theta), std::sin(theta));
    if (region.clip.contains(p)) return p;
  }
}

ControlDecision policy_step(Policy policy, const ControlState& state, Rng& rng) {
  if (state.ctx == nullptr) throw std::invalid_argument("policy_step: missing history context");
  const std::size_t r = state.positions.size();
  const HistoryContext& ctx = *state.ctx;

  ControlDecision out;
  out.targets.assign(state.positions.begin(), state.positions.end());
  out.stay_values.resize(r);
  for (std::size_t i = 0; i < r; ++i) out.stay_values[i] = objective_E(state.positions[i], ctx);
  out.stay_E = *std::max_element(out.stay_values.begin(), out.stay_values.end());

  auto region_of = [&](std::size_t i) {
    return FeasibleRegion{state.positions[i], state.radius, state.region};
  };

  switch (policy) {
    case Policy::kStatic:
      for (std::size_t i = 0; i < r; ++i) {
        out.per_relay_best.push_back({state.positions[i], out.stay_values[i]});
      }
      break;
    case Policy::kRandomWalk:
      for (std::size_t i = 0; i < r; ++i) {
        const Point p = sample_uniform(region_of(i), rng);
        out.targets[i] = p;
        out.per_relay_best.push_back({p, objective_E(p, ctx)});
      }
      break;
    case Policy::kSelective:
    case Policy::kMoveAll:
      for (std::size_t i = 0; i < r; ++i) {
        out.per_relay_best.push_back(inner_max(region_of(i), ctx, state.search));
      }
      out.chosen_relay = select_relay(out.per_relay_best);
      if (policy == Policy::kSelective) {
        out.targets[out.chosen_relay - 1] = out.per_relay_best[out.chosen_relay - 1].point;
      } else {
        for (std::size_t i = 0; i < r; ++i) out.targets[i] = out.per_relay_best[i].point;
      }
      break;
  }

  out.best_E = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < r; ++i) {
    const bool moved = out.targets[i] != state.positions[i];
    const double value = moved ? out.per_relay_best[i].value : out.stay_values[i];
    out.best_E = std::max(out.best_E, value);
    out.velocities.push_back(motion_command(out.targets[i], state.positions[i], state.dt));
  }
  return out;
}

}  // namespace relaybeam

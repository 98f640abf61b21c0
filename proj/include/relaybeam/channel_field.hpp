#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "relaybeam/geometry.hpp"
#include "relaybeam/rng.hpp"

namespace relaybeam {

/// Physical and statistical constants of the channel model. Powers in watts,
/// log-domain quantities in dB / dB^2.
struct ChannelParams {
  double path_loss_exponent = 2.3;
  double wavelength = 0.125;
  double shadow_power = 4.0;     // eta^2
  double corr_distance = 10.0;   // beta, meters
  double corr_time = 5.0;        // gamma, slots
  double bs_correlation = 50.0;  // delta, meters
  double fading_var = 1.0;       // sigma_xi^2
  double fading_mean_db = 0.0;   // rho
  double relay_noise_power = 1e-4;
  double dest_noise_power = 1e-4;
  double source_power = 1.0;
  double sinr_threshold = 10.0;

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;
};

struct NetworkGeometry {
  Rect region{{0.0, 0.0}, {100.0, 100.0}};
  Point source_pos{35.0, 50.0};
  Point dest_pos{65.0, 50.0};
  int num_relays = 3;
  std::vector<Point> initial_positions{{50.0, 40.0}, {50.0, 50.0}, {50.0, 60.0}};
  int num_slots = 30;
  double slot_move_interval = 1.0;  // seconds
  double max_speed = 2.0;           // meters / second

  double step_radius() const { return max_speed * slot_move_interval; }
  void validate() const;
};

/// Which terminal a log-gain refers to: F (source side) or G (destination side).
enum class Side { kSource = 0, kDest = 1 };

struct LogGainObservation {
  int slot = 0;         // 1-based
  int relay_index = 0;  // 1-based
  Point position{0.0, 0.0};
  double f_log = 0.0;
  double g_log = 0.0;
  double f_phase = 0.0;
  double g_phase = 0.0;
};

/// All R observations of one slot, ordered by relay index.
using SlotBlock = std::vector<LogGainObservation>;

/// -10 * l * log10(|pos - anchor|). Throws on coincident points.
double pathloss_log(const Point& pos, const Point& anchor, const ChannelParams& params);

/// Spatiotemporal shadowing covariance between two (position, slot) samples.
/// Mixed source/destination pairs carry the additional exp(-|pS - pD| / delta) factor.
class ShadowKernel {
 public:
  ShadowKernel(const ChannelParams& params, const NetworkGeometry& geometry);

  double operator()(const Point& pa, int ta, const Point& pb, int tb, bool same_anchor) const {
    const double base = eta2_ * std::exp(-distance(pa, pb) / beta_ -
                                         std::abs(static_cast<double>(ta - tb)) / gamma_);
    return same_anchor ? base : base * sd_attenuation_;
  }

  double shadow_power() const { return eta2_; }
  double sd_attenuation() const { return sd_attenuation_; }

 private:
  double eta2_;
  double beta_;
  double gamma_;
  double sd_attenuation_;
};

double shadow_cov(const Point& pa, int ta, const Point& pb, int tb, bool same_anchor,
                  const ChannelParams& params, const NetworkGeometry& geometry);

/// 2R x 2R block [Sigma_SS Sigma_SD; Sigma_DS Sigma_DD] between two slots. Fading
/// variance is added on the diagonal of the same-side blocks when slot_a == slot_b.
Eigen::MatrixXd build_sigma_block(int slot_a, int slot_b, std::span<const Point> positions_a,
                                  std::span<const Point> positions_b, const ChannelParams& params,
                                  const NetworkGeometry& geometry);

/// Stacked prior means [alpha_S l ...; alpha_D l ...] of one slot.
Eigen::VectorXd prior_mean_block(std::span<const Point> positions, const ChannelParams& params,
                                 const NetworkGeometry& geometry);

/// Conditional Gaussian law of the next slot's stacked [F; G] vector.
struct ConditionalLaw {
  Eigen::VectorXd mean;
  Eigen::MatrixXd chol;   // lower factor of the conditional covariance (+ jitter)
  Eigen::MatrixXd cross;  // L21: rows of the extended history factor
};

/// Trajectories and realized log-gains of all relays, with an incrementally
/// maintained Cholesky factor of the covariance of the conditioned slots.
class FieldHistory {
 public:
  FieldHistory(ChannelParams params, NetworkGeometry geometry,
               std::optional<int> window = std::nullopt);

  int num_relays() const { return geometry_.num_relays; }
  int num_slots() const { return static_cast<int>(blocks_.size()); }
  bool empty() const { return blocks_.empty(); }
  const std::vector<SlotBlock>& blocks() const { return blocks_; }
  const ChannelParams& params() const { return params_; }
  const NetworkGeometry& geometry() const { return geometry_; }
  std::optional<int> window() const { return window_; }

  /// 1-based index of the oldest slot that enters the conditioning set.
  int first_conditioned_slot() const { return first_slot_; }
  int conditioned_slots() const { return num_slots() - first_slot_ + 1; }
  int dimension() const { return static_cast<int>(chol_.rows()); }

  const Eigen::MatrixXd& chol_factor() const { return chol_; }
  /// L^{-1} (m - mu) over the conditioned slots.
  const Eigen::VectorXd& whitened_residual() const { return whitened_; }

  /// m - mu over the conditioned slots, stacked per slot as [F; G].
  Eigen::VectorXd observed_minus_prior() const;
  /// mu over the conditioned slots.
  Eigen::VectorXd prior_means() const;
  /// Sigma over the conditioned slots, without jitter.
  Eigen::MatrixXd assemble_covariance() const;
  /// Debug path: factor of Sigma + jitter I computed from scratch.
  Eigen::MatrixXd refactor_full() const;

  double jitter() const { return 1e-9 * params_.shadow_power; }

  /// Law of slot num_slots()+1 at the given positions, given the conditioning set.
  ConditionalLaw conditional_law(std::span<const Point> positions) const;

  /// Appends a complete slot block (slot must equal num_slots()+1).
  void append(SlotBlock block);
  /// Appends a block whose law was already computed by conditional_law().
  void append(SlotBlock block, const ConditionalLaw& law);

 private:
  void rebuild();
  std::vector<Point> block_positions(int slot) const;

  ChannelParams params_;
  NetworkGeometry geometry_;
  ShadowKernel kernel_;
  std::optional<int> window_;
  std::vector<SlotBlock> blocks_;
  int first_slot_ = 1;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd whitened_;
};

/// Draws the next slot's log-gains from the conditional law and uniform phases,
/// appends it to the history and returns it.
SlotBlock sample_next_slot(FieldHistory& history, std::span<const Point> new_positions, Rng& rng);

struct ComplexGains {
  std::complex<double> f;
  std::complex<double> g;
};

/// |f| = 10^((F + rho)/20) with the stored fading phase; same for g.
std::vector<ComplexGains> to_complex_gains(const SlotBlock& block, const ChannelParams& params);

}  // namespace relaybeam

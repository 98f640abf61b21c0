#pragma once

#include <Eigen/Dense>

#include "relaybeam/channel_field.hpp"

namespace relaybeam {

/// Per-slot quantities shared by every candidate evaluation: the candidate
/// position only enters through its covariance rows against the history.
struct HistoryContext {
  const FieldHistory* history = nullptr;
  Eigen::VectorXd residual;     // Sigma^{-1} (m - mu)
  Eigen::VectorXd prior_means;  // mu over the conditioned slots
  int slot = 1;                 // slot whose gains are predicted

  static HistoryContext from(const FieldHistory& history);
};

/// Conditional law of (G_i, F_i) at a candidate position. cross_cov is ordered (G, F).
struct ShadowPosterior {
  double mu_g = 0.0;
  double mu_f = 0.0;
  double var_g = 0.0;
  Eigen::Matrix2d cross_cov = Eigen::Matrix2d::Zero();

  double var_f() const { return cross_cov(1, 1); }
};

/// Covariance between the candidate's `side` shadowing at the context slot and
/// every conditioned history entry, in stacked [F; G]-per-slot order.
Eigen::RowVectorXd cross_cov_row(const Point& candidate, Side side, const FieldHistory& history,
                                 int candidate_slot);

ShadowPosterior condition(const Point& candidate, const HistoryContext& ctx);

/// E{|g|^2 | history}.
double expected_g2(const ShadowPosterior& post, const ChannelParams& params);
/// E{|g|^2 |f|^-2 | history}; the fading mean cancels.
double expected_g2_over_f2(const ShadowPosterior& post);

/// E{|g|^2} - (zeta sigma^2 / P0) E{|g|^2 / |f|^2} for a given posterior.
double objective_from_posterior(const ShadowPosterior& post, const ChannelParams& params);

/// High-SNR diagonal element of the conditional mean of B:
/// E{|g|^2} - (zeta sigma^2 / P0) E{|g|^2 / |f|^2}.
double objective_E(const Point& candidate, const HistoryContext& ctx);

}  // namespace relaybeam

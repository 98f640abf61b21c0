#include "relaybeam/posterior.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace relaybeam {

namespace {

constexpr double kLn10 = std::numbers::ln10;
constexpr double kVarianceTolerance = 1e-8;

double clamp_variance(double v) {
  if (v < -kVarianceTolerance) throw std::runtime_error("posterior degeneracy");
  return v < 0.0 ? 0.0 : v;
}

}  // namespace

HistoryContext HistoryContext::from(const FieldHistory& history) {
  HistoryContext ctx;
  ctx.history = &history;
  ctx.slot = history.num_slots() + 1;
  ctx.prior_means = history.prior_means();
  if (history.dimension() > 0) {
    ctx.residual = history.chol_factor().transpose().triangularView<Eigen::Upper>().solve(
        history.whitened_residual());
  } else {
    ctx.residual.resize(0);
  }
  return ctx;
}

Eigen::RowVectorXd cross_cov_row(const Point& candidate, Side side, const FieldHistory& history,
                                 int candidate_slot) {
  const int r = history.num_relays();
  const ShadowKernel kernel(history.params(), history.geometry());
  Eigen::RowVectorXd row(history.dimension());
  int offset = 0;
  for (int k = history.first_conditioned_slot(); k <= history.num_slots(); ++k) {
    const auto& block = history.blocks()[k - 1];
    for (int j = 0; j < r; ++j) {
      const double same = kernel(candidate, candidate_slot, block[j].position, k, true);
      const double mixed = same * kernel.sd_attenuation();
      row(offset + j) = side == Side::kSource ? same : mixed;
      row(offset + r + j) = side == Side::kDest ? same : mixed;
    }
    offset += 2 * r;
  }
  return row;
}

ShadowPosterior condition(const Point& candidate, const HistoryContext& ctx) {
  const FieldHistory& history = *ctx.history;
  const ChannelParams& params = history.params();
  const NetworkGeometry& geometry = history.geometry();
  const double eta2 = params.shadow_power;
  const double prior_var = eta2 + params.fading_var;
  const double prior_cross = eta2 * std::exp(-distance(geometry.source_pos, geometry.dest_pos) /
                                             params.bs_correlation);

  ShadowPosterior post;
  post.mu_g = pathloss_log(candidate, geometry.dest_pos, params);
  post.mu_f = pathloss_log(candidate, geometry.source_pos, params);
  post.cross_cov << prior_var, prior_cross, prior_cross, prior_var;

  const int n = history.dimension();
  if (n > 0) {
    // Columns: G row, F row.
    const int r = history.num_relays();
    const ShadowKernel kernel(params, geometry);
    Eigen::MatrixXd rows(n, 2);
    int offset = 0;
    for (int k = history.first_conditioned_slot(); k <= history.num_slots(); ++k) {
      const auto& block = history.blocks()[k - 1];
      for (int j = 0; j < r; ++j) {
        const double same = kernel(candidate, ctx.slot, block[j].position, k, true);
        const double mixed = same * kernel.sd_attenuation();
        rows(offset + j, 0) = mixed;
        rows(offset + r + j, 0) = same;
        rows(offset + j, 1) = same;
        rows(offset + r + j, 1) = mixed;
      }
      offset += 2 * r;
    }
    post.mu_g += rows.col(0).dot(ctx.residual);
    post.mu_f += rows.col(1).dot(ctx.residual);
    history.chol_factor().triangularView<Eigen::Lower>().solveInPlace(rows);
    post.cross_cov.noalias() -= rows.transpose() * rows;
  }
  post.cross_cov(0, 0) = clamp_variance(post.cross_cov(0, 0));
  post.cross_cov(1, 1) = clamp_variance(post.cross_cov(1, 1));
  post.cross_cov(1, 0) = post.cross_cov(0, 1);
  post.var_g = post.cross_cov(0, 0);
  return post;
}

double expected_g2(const ShadowPosterior& post, const ChannelParams& params) {
  return std::pow(10.0, params.fading_mean_db / 10.0) *
         std::exp(kLn10 / 10.0 * post.mu_g + kLn10 * kLn10 / 200.0 * post.var_g);
}

double expected_g2_over_f2(const ShadowPosterior& post) {
  const double qform = post.cross_cov(0, 0) - 2.0 * post.cross_cov(0, 1) + post.cross_cov(1, 1);
  return std::exp(kLn10 / 10.0 * (post.mu_g - post.mu_f) + kLn10 * kLn10 / 200.0 * qform);
}

double objective_from_posterior(const ShadowPosterior& post, const ChannelParams& params) {
  const double penalty = params.sinr_threshold * params.relay_noise_power / params.source_power;
  return expected_g2(post, params) - penalty * expected_g2_over_f2(post);
}

double objective_E(const Point& candidate, const HistoryContext& ctx) {
  return objective_from_posterior(condition(candidate, ctx), ctx.history->params());
}

}  // namespace relaybeam

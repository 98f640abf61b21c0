#pragma once

// Independent reference implementations used only by the tests. Nothing here
// calls into the library's covariance or conditioning code.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "relaybeam/channel_field.hpp"

namespace oracle {

struct Sample {
  relaybeam::Point pos;
  int slot = 0;
  int side = 0;  // 0: source (F), 1: destination (G)
};

inline double kernel(const Sample& a, const Sample& b, const relaybeam::ChannelParams& p,
                     const relaybeam::NetworkGeometry& g) {
  double c = p.shadow_power * std::exp(-(a.pos - b.pos).norm() / p.corr_distance -
                                       std::abs(a.slot - b.slot) / p.corr_time);
  if (a.side != b.side) c *= std::exp(-(g.source_pos - g.dest_pos).norm() / p.bs_correlation);
  return c;
}

// Fading variance sits on the diagonal of the stacked vector: same slot, relay and side.
inline Eigen::MatrixXd joint_cov(const std::vector<Sample>& s, const std::vector<int>& relay,
                                 const relaybeam::ChannelParams& p,
                                 const relaybeam::NetworkGeometry& g) {
  const int n = static_cast<int>(s.size());
  Eigen::MatrixXd c(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      c(i, j) = kernel(s[i], s[j], p, g);
      if (s[i].slot == s[j].slot && s[i].side == s[j].side && relay[i] == relay[j]) {
        c(i, j) += p.fading_var;
      }
    }
  }
  return c;
}

inline double mean_of(const Sample& s, const relaybeam::ChannelParams& p,
                      const relaybeam::NetworkGeometry& g) {
  const relaybeam::Point& anchor = s.side == 0 ? g.source_pos : g.dest_pos;
  return -10.0 * p.path_loss_exponent * std::log10((s.pos - anchor).norm());
}

// Stacked samples of a history in the library's order: per slot [F_1..F_R, G_1..G_R].
struct Stacked {
  std::vector<Sample> samples;
  std::vector<int> relay;
  Eigen::VectorXd values;
};

inline Stacked stack(const relaybeam::FieldHistory& h) {
  Stacked out;
  std::vector<double> vals;
  for (const auto& block : h.blocks()) {
    for (int side = 0; side < 2; ++side) {
      for (const auto& o : block) {
        out.samples.push_back({o.position, o.slot, side});
        out.relay.push_back(o.relay_index);
        vals.push_back(side == 0 ? o.f_log : o.g_log);
      }
    }
  }
  out.values = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<int>(vals.size()));
  return out;
}

struct Gaussian2 {
  Eigen::Vector2d mean;  // (G, F)
  Eigen::Matrix2d cov;
};

// Conditional law of (G, F) at `pos`, slot `slot`, via an explicit inverse of the
// history covariance (plus an optional diagonal jitter). The candidate carries its
// own fading term.
inline Gaussian2 explicit_conditional(const relaybeam::FieldHistory& h, const relaybeam::Point& pos,
                                      int slot, double jitter = 0.0) {
  const auto& p = h.params();
  const auto& g = h.geometry();
  const Stacked st = stack(h);
  const Sample sg{pos, slot, 1};
  const Sample sf{pos, slot, 0};
  Gaussian2 out;
  out.mean << mean_of(sg, p, g), mean_of(sf, p, g);
  out.cov << kernel(sg, sg, p, g) + p.fading_var, kernel(sg, sf, p, g), kernel(sf, sg, p, g),
      kernel(sf, sf, p, g) + p.fading_var;
  const int n = static_cast<int>(st.samples.size());
  if (n == 0) return out;
  Eigen::MatrixXd c = joint_cov(st.samples, st.relay, p, g);
  c.diagonal().array() += jitter;
  Eigen::VectorXd mu(n);
  Eigen::MatrixXd k(2, n);
  for (int i = 0; i < n; ++i) {
    mu(i) = mean_of(st.samples[i], p, g);
    k(0, i) = kernel(sg, st.samples[i], p, g);
    k(1, i) = kernel(sf, st.samples[i], p, g);
  }
  const Eigen::MatrixXd cinv = c.fullPivLu().inverse();
  out.mean += k * cinv * (st.values - mu);
  out.cov -= k * cinv * k.transpose();
  return out;
}

// Sample mean/variance with standard errors from the sample fourth moment.
struct Moments {
  double mean = 0.0;
  double var = 0.0;
  double mean_se = 0.0;
  double var_se = 0.0;
};

inline Moments moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  Moments m;
  for (double v : x) m.mean += v;
  m.mean /= n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - m.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m4 /= n;
  m.var = m2 * n / (n - 1.0);
  m.mean_se = std::sqrt(m2 / n);
  m.var_se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
  return m;
}

}  // namespace oracle

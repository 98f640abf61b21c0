#include "relaybeam/beamformer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace relaybeam {

void SlotChannels::validate() const {
  if (f.size() != g.size() || f.size() == 0) {
    throw std::invalid_argument("slot channels: f and g must be nonempty and equal length");
  }
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    const double af = std::abs(f(i));
    const double ag = std::abs(g(i));
    if (!std::isfinite(af) || !std::isfinite(ag) || af == 0.0 || ag == 0.0) {
      throw std::invalid_argument("slot channels: gains must be finite and nonzero");
    }
  }
}

SlotChannels SlotChannels::from_gains(std::span<const ComplexGains> gains) {
  SlotChannels ch;
  ch.f.resize(static_cast<Eigen::Index>(gains.size()));
  ch.g.resize(static_cast<Eigen::Index>(gains.size()));
  for (std::size_t i = 0; i < gains.size(); ++i) {
    ch.f(static_cast<Eigen::Index>(i)) = gains[i].f;
    ch.g(static_cast<Eigen::Index>(i)) = gains[i].g;
  }
  return ch;
}

BeamMatrices build_matrices(const SlotChannels& ch, const ChannelParams& params) {
  BeamMatrices m;
  const double p0 = params.source_power;
  const double s2 = params.relay_noise_power;
  m.d = p0 * ch.f.cwiseAbs2().array() + s2;
  m.h = ch.f.cwiseProduct(ch.g);
  m.r = p0 * m.h * m.h.adjoint();
  m.q = s2 * ch.g.cwiseAbs2().array();
  return m;
}

Eigen::MatrixXcd form_b_matrix(const SlotChannels& ch, const ChannelParams& params) {
  const BeamMatrices m = build_matrices(ch, params);
  const Eigen::VectorXd inv_sqrt_d = m.d.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXcd b = m.r;
  b.diagonal() -= (params.sinr_threshold * m.q).cast<std::complex<double>>();
  return inv_sqrt_d.asDiagonal() * b * inv_sqrt_d.asDiagonal();
}

EigenPair rank_one_plus_diagonal_max(const Eigen::VectorXd& d, const Eigen::VectorXcd& v,
                                     double scale) {
  const Eigen::Index n = d.size();
  if (v.size() != n || n == 0) throw std::invalid_argument("secular solve: size mismatch");
  if (!(scale > 0.0)) throw std::invalid_argument("secular solve: scale must be > 0");

  const Eigen::VectorXd a = scale * v.cwiseAbs2();
  // Components with v_i = 0 decouple and contribute d_i as an eigenvalue.
  double d_top = -std::numeric_limits<double>::infinity();
  Eigen::Index deflated_top = -1;
  double d_max = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a(i) > 0.0) {
      d_max = std::max(d_max, d(i));
    } else if (d(i) > d_top) {
      d_top = d(i);
      deflated_top = i;
    }
  }

  EigenPair out;
  out.vector = Eigen::VectorXcd::Zero(n);
  if (!std::isfinite(d_max)) {
    out.value = d_top;
    out.vector(deflated_top) = 1.0;
    return out;
  }

  // lambda = d_max + s with gaps c_i = d_max - d_i >= 0; f(s) = 1 - sum a_i / (s + c_i)
  // is increasing and concave, so Newton from a point left of the root climbs monotonically.
  Eigen::VectorXd gap(n);
  double s = 0.0;
  double upper = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a(i) <= 0.0) continue;
    gap(i) = d_max - d(i);
    upper += a(i);
    if (gap(i) == 0.0) s += a(i);
  }
  for (int iter = 0; iter < 200; ++iter) {
    double f = 1.0;
    double df = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (a(i) <= 0.0) continue;
      const double inv = 1.0 / (s + gap(i));
      f -= a(i) * inv;
      df += a(i) * inv * inv;
    }
    if (f >= 0.0 || df == 0.0) break;
    const double next = std::min(s - f / df, upper);
    if (!(next > s)) break;
    const bool converged = next - s <= 4.0 * std::numeric_limits<double>::epsilon() * next;
    s = next;
    if (converged) break;
  }

  const double lambda = d_max + s;
  if (deflated_top >= 0 && d_top > lambda) {
    out.value = d_top;
    out.vector(deflated_top) = 1.0;
    return out;
  }
  out.value = lambda;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a(i) > 0.0) out.vector(i) = v(i) / (s + gap(i));
  }
  out.vector.normalize();
  return out;
}

EigenPair hermitian_max_dense(const Eigen::MatrixXcd& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(b);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigen failure");
  const Eigen::Index top = b.rows() - 1;
  return {solver.eigenvalues()(top), solver.eigenvectors().col(top)};
}

BeamSolution solve_second_stage(const SlotChannels& ch, const ChannelParams& params,
                                EigenPath path) {
  ch.validate();
  const BeamMatrices m = build_matrices(ch, params);
  const double zeta = params.sinr_threshold;
  const double sd2 = params.dest_noise_power;
  const Eigen::VectorXd inv_sqrt_d = m.d.cwiseSqrt().cwiseInverse();

  EigenPair top;
  if (path == EigenPath::kSecular) {
    const Eigen::VectorXd diag = -zeta * m.q.cwiseProduct(m.d.cwiseInverse());
    const Eigen::VectorXcd v = inv_sqrt_d.cast<std::complex<double>>().cwiseProduct(m.h);
    top = rank_one_plus_diagonal_max(diag, v, params.source_power);
  } else {
    top = hermitian_max_dense(form_b_matrix(ch, params));
  }

  BeamSolution sol;
  sol.lambda_max = top.value;
  sol.value_V = top.value / (zeta * sd2);
  sol.feasible = top.value > 0.0;
  sol.weights = Eigen::VectorXcd::Zero(ch.size());
  if (!sol.feasible) return sol;

  const Eigen::VectorXcd x = inv_sqrt_d.cast<std::complex<double>>().cwiseProduct(top.vector);
  const double signal = std::norm(m.h.dot(x)) * params.source_power;
  const double interference = (m.q.array() * x.cwiseAbs2().array()).sum();
  const double margin = signal - zeta * interference;
  if (!(margin > 0.0)) {
    sol.feasible = false;
    return sol;
  }
  sol.weights = std::sqrt(zeta * sd2 / margin) * x;
  const WeightMetrics metrics = evaluate_weights(ch, sol.weights, params);
  sol.relay_power = metrics.relay_power;
  sol.achieved_sinr = metrics.sinr;
  return sol;
}

WeightMetrics evaluate_weights(const SlotChannels& ch, const Eigen::VectorXcd& weights,
                               const ChannelParams& params) {
  const BeamMatrices m = build_matrices(ch, params);
  const Eigen::VectorXd w2 = weights.cwiseAbs2();
  WeightMetrics out;
  out.relay_power = m.d.dot(w2);
  const double signal = params.source_power * std::norm(m.h.dot(weights));
  out.sinr = signal / (params.dest_noise_power + m.q.dot(w2));
  return out;
}

}  // namespace relaybeam

#pragma once

#include <span>

#include <Eigen/Dense>

#include "relaybeam/channel_field.hpp"

namespace relaybeam {

/// Realized source->relay (f) and relay->destination (g) gains of one slot.
struct SlotChannels {
  Eigen::VectorXcd f;
  Eigen::VectorXcd g;

  int size() const { return static_cast<int>(f.size()); }
  void validate() const;
  static SlotChannels from_gains(std::span<const ComplexGains> gains);
};

/// D and Q are diagonal and stored as vectors; R = P0 h h^H is kept dense.
struct BeamMatrices {
  Eigen::VectorXd d;
  Eigen::MatrixXcd r;
  Eigen::VectorXd q;
  Eigen::VectorXcd h;
};

BeamMatrices build_matrices(const SlotChannels& ch, const ChannelParams& params);

/// B = D^{-1/2} (R - zeta Q) D^{-1/2}, dense.
Eigen::MatrixXcd form_b_matrix(const SlotChannels& ch, const ChannelParams& params);

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXcd vector;
};

/// Largest eigenpair of diag(d) + scale * v v^H (scale > 0) from the secular
/// equation 1 = scale * sum |v_i|^2 / (lambda - d_i).
EigenPair rank_one_plus_diagonal_max(const Eigen::VectorXd& d, const Eigen::VectorXcd& v,
                                     double scale);

/// Largest eigenpair of a Hermitian matrix via a dense solver.
EigenPair hermitian_max_dense(const Eigen::MatrixXcd& b);

enum class EigenPath { kSecular, kDense };

struct BeamSolution {
  Eigen::VectorXcd weights;
  double lambda_max = 0.0;
  double value_V = 0.0;
  double relay_power = 0.0;
  double achieved_sinr = 0.0;
  bool feasible = false;
};

BeamSolution solve_second_stage(const SlotChannels& ch, const ChannelParams& params,
                                EigenPath path = EigenPath::kSecular);

struct WeightMetrics {
  double relay_power = 0.0;
  double sinr = 0.0;
};

/// (w^H D w, w^H R w / (sigma_D^2 + w^H Q w)).
WeightMetrics evaluate_weights(const SlotChannels& ch, const Eigen::VectorXcd& weights,
                               const ChannelParams& params);

}  // namespace relaybeam

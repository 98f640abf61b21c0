#include "relaybeam/channel_field.hpp"

#include <numbers>
#include <stdexcept>
#include <string>

namespace relaybeam {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("channel parameter '") + name + "' must be > 0");
  }
}

int side_index(Side side, int relay0, int num_relays) {
  return static_cast<int>(side) * num_relays + relay0;
}

}  // namespace

void ChannelParams::validate() const {
  require_positive(path_loss_exponent, "path_loss_exponent");
  require_positive(wavelength, "wavelength");
  require_positive(shadow_power, "shadow_power");
  require_positive(corr_distance, "corr_distance");
  require_positive(corr_time, "corr_time");
  require_positive(bs_correlation, "bs_correlation");
  if (!(fading_var >= 0.0) || !std::isfinite(fading_var)) {
    throw std::invalid_argument("channel parameter 'fading_var' must be >= 0");
  }
  if (!std::isfinite(fading_mean_db)) {
    throw std::invalid_argument("channel parameter 'fading_mean_db' must be finite");
  }
  require_positive(relay_noise_power, "relay_noise_power");
  require_positive(dest_noise_power, "dest_noise_power");
  require_positive(source_power, "source_power");
  require_positive(sinr_threshold, "sinr_threshold");
}

void NetworkGeometry::validate() const {
  if (!region.valid()) throw std::invalid_argument("geometry: empty region");
  if (num_relays < 1) throw std::invalid_argument("geometry: num_relays must be >= 1");
  if (num_slots < 1) throw std::invalid_argument("geometry: num_slots must be >= 1");
  if (!(slot_move_interval > 0.0)) {
    throw std::invalid_argument("geometry: slot_move_interval must be > 0");
  }
  if (!(max_speed >= 0.0)) throw std::invalid_argument("geometry: max_speed must be >= 0");
  if (!region.contains(source_pos)) throw std::invalid_argument("geometry: source outside region");
  if (!region.contains(dest_pos)) {
    throw std::invalid_argument("geometry: destination outside region");
  }
  if (source_pos == dest_pos) {
    throw std::invalid_argument("geometry: source and destination coincide");
  }
  if (static_cast<int>(initial_positions.size()) != num_relays) {
    throw std::invalid_argument("geometry: need exactly num_relays initial positions");
  }
  for (const auto& p : initial_positions) {
    if (!region.contains(p)) throw std::invalid_argument("geometry: initial position outside region");
  }
}

double pathloss_log(const Point& pos, const Point& anchor, const ChannelParams& params) {
  const double d = distance(pos, anchor);
  if (!(d > 0.0)) throw std::domain_error("degenerate distance");
  return -10.0 * params.path_loss_exponent * std::log10(d);
}

ShadowKernel::ShadowKernel(const ChannelParams& params, const NetworkGeometry& geometry)
    : eta2_(params.shadow_power),
      beta_(params.corr_distance),
      gamma_(params.corr_time),
      sd_attenuation_(std::exp(-distance(geometry.source_pos, geometry.dest_pos) /
                               params.bs_correlation)) {}

double shadow_cov(const Point& pa, int ta, const Point& pb, int tb, bool same_anchor,
                  const ChannelParams& params, const NetworkGeometry& geometry) {
  return ShadowKernel(params, geometry)(pa, ta, pb, tb, same_anchor);
}

Eigen::MatrixXd build_sigma_block(int slot_a, int slot_b, std::span<const Point> positions_a,
                                  std::span<const Point> positions_b, const ChannelParams& params,
                                  const NetworkGeometry& geometry) {
  if (positions_a.size() != positions_b.size()) {
    throw std::invalid_argument("build_sigma_block: position vectors differ in length");
  }
  const ShadowKernel kernel(params, geometry);
  const int r = static_cast<int>(positions_a.size());
  Eigen::MatrixXd block(2 * r, 2 * r);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      const double same = kernel(positions_a[i], slot_a, positions_b[j], slot_b, true);
      const double mixed = same * kernel.sd_attenuation();
      block(i, j) = same;
      block(r + i, r + j) = same;
      block(i, r + j) = mixed;
      block(r + i, j) = mixed;
    }
  }
  if (slot_a == slot_b) {
    block.diagonal().array() += params.fading_var;
  }
  return block;
}

Eigen::VectorXd prior_mean_block(std::span<const Point> positions, const ChannelParams& params,
                                 const NetworkGeometry& geometry) {
  const int r = static_cast<int>(positions.size());
  Eigen::VectorXd mu(2 * r);
  for (int i = 0; i < r; ++i) {
    mu(i) = pathloss_log(positions[i], geometry.source_pos, params);
    mu(r + i) = pathloss_log(positions[i], geometry.dest_pos, params);
  }
  return mu;
}

FieldHistory::FieldHistory(ChannelParams params, NetworkGeometry geometry,
                           std::optional<int> window)
    : params_(params), geometry_(std::move(geometry)), kernel_(params_, geometry_), window_(window) {
  params_.validate();
  if (geometry_.num_relays < 1) throw std::invalid_argument("geometry: num_relays must be >= 1");
  if (window_ && *window_ < 1) throw std::invalid_argument("history window must be >= 1");
  chol_.resize(0, 0);
  whitened_.resize(0);
}

std::vector<Point> FieldHistory::block_positions(int slot) const {
  const auto& block = blocks_.at(slot - 1);
  std::vector<Point> pos;
  pos.reserve(block.size());
  for (const auto& obs : block) pos.push_back(obs.position);
  return pos;
}

Eigen::VectorXd FieldHistory::observed_minus_prior() const {
  const int r = num_relays();
  Eigen::VectorXd out(dimension());
  int offset = 0;
  for (int k = first_slot_; k <= num_slots(); ++k) {
    const auto pos = block_positions(k);
    const Eigen::VectorXd mu = prior_mean_block(pos, params_, geometry_);
    const auto& block = blocks_[k - 1];
    for (int j = 0; j < r; ++j) {
      out(offset + j) = block[j].f_log - mu(j);
      out(offset + r + j) = block[j].g_log - mu(r + j);
    }
    offset += 2 * r;
  }
  return out;
}

Eigen::VectorXd FieldHistory::prior_means() const {
  const int r = num_relays();
  Eigen::VectorXd out(dimension());
  int offset = 0;
  for (int k = first_slot_; k <= num_slots(); ++k) {
    out.segment(offset, 2 * r) = prior_mean_block(block_positions(k), params_, geometry_);
    offset += 2 * r;
  }
  return out;
}

Eigen::MatrixXd FieldHistory::assemble_covariance() const {
  const int r = num_relays();
  const int slots = conditioned_slots();
  Eigen::MatrixXd sigma(2 * r * slots, 2 * r * slots);
  for (int a = 0; a < slots; ++a) {
    const auto pa = block_positions(first_slot_ + a);
    for (int b = 0; b <= a; ++b) {
      const auto pb = block_positions(first_slot_ + b);
      const Eigen::MatrixXd blk =
          build_sigma_block(first_slot_ + a, first_slot_ + b, pa, pb, params_, geometry_);
      sigma.block(2 * r * a, 2 * r * b, 2 * r, 2 * r) = blk;
      sigma.block(2 * r * b, 2 * r * a, 2 * r, 2 * r) = blk.transpose();
    }
  }
  return sigma;
}

Eigen::MatrixXd FieldHistory::refactor_full() const {
  if (dimension() == 0) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd sigma = assemble_covariance();
  sigma.diagonal().array() += jitter();
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw std::runtime_error("conditioning failure");
  return llt.matrixL();
}

void FieldHistory::rebuild() {
  chol_ = refactor_full();
  if (dimension() == 0) {
    whitened_.resize(0);
    return;
  }
  whitened_ = chol_.triangularView<Eigen::Lower>().solve(observed_minus_prior());
}

ConditionalLaw FieldHistory::conditional_law(std::span<const Point> positions) const {
  const int r = num_relays();
  if (static_cast<int>(positions.size()) != r) {
    throw std::invalid_argument("conditional_law: expected one position per relay");
  }
  const int t_new = num_slots() + 1;
  const int n = dimension();

  ConditionalLaw law;
  law.mean = prior_mean_block(positions, params_, geometry_);
  Eigen::MatrixXd cov = build_sigma_block(t_new, t_new, positions, positions, params_, geometry_);
  cov.diagonal().array() += jitter();

  if (n > 0) {
    // K21: covariance between the new slot and every conditioned slot.
    Eigen::MatrixXd k12(n, 2 * r);
    int offset = 0;
    for (int k = first_slot_; k <= num_slots(); ++k) {
      const auto& block = blocks_[k - 1];
      for (int j = 0; j < r; ++j) {
        for (int i = 0; i < r; ++i) {
          const double same = kernel_(block[j].position, k, positions[i], t_new, true);
          const double mixed = same * kernel_.sd_attenuation();
          k12(offset + side_index(Side::kSource, j, r), side_index(Side::kSource, i, r)) = same;
          k12(offset + side_index(Side::kDest, j, r), side_index(Side::kDest, i, r)) = same;
          k12(offset + side_index(Side::kSource, j, r), side_index(Side::kDest, i, r)) = mixed;
          k12(offset + side_index(Side::kDest, j, r), side_index(Side::kSource, i, r)) = mixed;
        }
      }
      offset += 2 * r;
    }
    const Eigen::MatrixXd x = chol_.triangularView<Eigen::Lower>().solve(k12);
    law.cross = x.transpose();
    law.mean.noalias() += law.cross * whitened_;
    cov.noalias() -= law.cross * law.cross.transpose();
  } else {
    law.cross.resize(2 * r, 0);
  }

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw std::runtime_error("conditioning failure");
  law.chol = llt.matrixL();
  return law;
}

void FieldHistory::append(SlotBlock block) {
  std::vector<Point> pos;
  pos.reserve(block.size());
  for (const auto& obs : block) pos.push_back(obs.position);
  const ConditionalLaw law = conditional_law(pos);
  append(std::move(block), law);
}

void FieldHistory::append(SlotBlock block, const ConditionalLaw& law) {
  const int r = num_relays();
  const int t_new = num_slots() + 1;
  if (static_cast<int>(block.size()) != r) {
    throw std::invalid_argument("append: block must hold one observation per relay");
  }
  for (int i = 0; i < r; ++i) {
    if (block[i].slot != t_new || block[i].relay_index != i + 1) {
      throw std::invalid_argument("append: block slots must be contiguous and ordered by relay");
    }
  }
  Eigen::VectorXd x(2 * r);
  for (int i = 0; i < r; ++i) {
    x(i) = block[i].f_log;
    x(r + i) = block[i].g_log;
  }
  const Eigen::VectorXd z_new = law.chol.triangularView<Eigen::Lower>().solve(x - law.mean);

  blocks_.push_back(std::move(block));
  if (window_ && conditioned_slots() > *window_) {
    first_slot_ = num_slots() - *window_ + 1;
    rebuild();
    return;
  }

  const int n = dimension();
  Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(n + 2 * r, n + 2 * r);
  grown.topLeftCorner(n, n) = chol_;
  grown.block(n, 0, 2 * r, n) = law.cross;
  grown.bottomRightCorner(2 * r, 2 * r) = law.chol;
  chol_ = std::move(grown);

  Eigen::VectorXd z(n + 2 * r);
  z.head(n) = whitened_;
  z.tail(2 * r) = z_new;
  whitened_ = std::move(z);
}

SlotBlock sample_next_slot(FieldHistory& history, std::span<const Point> new_positions, Rng& rng) {
  const int r = history.num_relays();
  const ConditionalLaw law = history.conditional_law(new_positions);

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd eps(2 * r);
  for (int k = 0; k < 2 * r; ++k) eps(k) = normal(rng);
  const Eigen::VectorXd x = law.mean + law.chol * eps;

  std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
  const int t_new = history.num_slots() + 1;
  SlotBlock block(r);
  for (int i = 0; i < r; ++i) {
    auto& obs = block[i];
    obs.slot = t_new;
    obs.relay_index = i + 1;
    obs.position = new_positions[i];
    obs.f_log = x(i);
    obs.g_log = x(r + i);
    obs.f_phase = phase(rng);
    obs.g_phase = phase(rng);
  }
  history.append(block, law);
  return block;
}

std::vector<ComplexGains> to_complex_gains(const SlotBlock& block, const ChannelParams& params) {
  std::vector<ComplexGains> out;
  out.reserve(block.size());
  for (const auto& obs : block) {
    const double f_mag = std::pow(10.0, (obs.f_log + params.fading_mean_db) / 20.0);
    const double g_mag = std::pow(10.0, (obs.g_log + params.fading_mean_db) / 20.0);
    out.push_back({std::polar(f_mag, obs.f_phase), std::polar(g_mag, obs.g_phase)});
  }
  return out;
}

}  // namespace relaybeam

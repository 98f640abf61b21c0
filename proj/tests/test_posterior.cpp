#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "relaybeam/channel_field.hpp"
#include "relaybeam/posterior.hpp"

using namespace relaybeam;

namespace {

Point random_point(std::mt19937_64& rng, double lo = 0.0, double hi = 100.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng)};
}

// History with `slots` blocks at random positions near the default relays.
FieldHistory random_history(const ChannelParams& p, const NetworkGeometry& g, int slots,
                            std::uint64_t seed) {
  FieldHistory h(p, g);
  std::mt19937_64 walk(seed);
  Rng rng(seed + 1);
  std::vector<Point> pos = g.initial_positions;
  for (int t = 0; t < slots; ++t) {
    sample_next_slot(h, pos, rng);
    for (auto& q : pos) q = g.region.clamp(q + random_point(walk, -3.0, 3.0));
  }
  return h;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("cross_cov_row examples") {
  ChannelParams p;
  NetworkGeometry g;
  g.num_relays = 1;
  g.initial_positions = {{50.0, 40.0}};
  FieldHistory h(p, g);
  Rng rng(1);
  sample_next_slot(h, g.initial_positions, rng);
  const Eigen::RowVectorXd row = cross_cov_row({50.0, 40.0}, Side::kDest, h, 2);
  REQUIRE(row.size() == 2);
  const double same = p.shadow_power * std::exp(-1.0 / p.corr_time);
  CHECK(row(1) == doctest::Approx(same).epsilon(1e-14));
  CHECK(row(0) == doctest::Approx(same * std::exp(-30.0 / p.bs_correlation)).epsilon(1e-14));

  NetworkGeometry big = g;
  big.region = {{0.0, 0.0}, {1e6, 1e6}};
  FieldHistory hb(p, big);
  sample_next_slot(hb, big.initial_positions, rng);
  sample_next_slot(hb, big.initial_positions, rng);
  const Eigen::RowVectorXd far = cross_cov_row({9e5, 9e5}, Side::kSource, hb, 3);
  CHECK(far.size() == 4);
  CHECK(far.cwiseAbs().maxCoeff() < 1e-100);
}

TEST_CASE("condition with empty history returns the prior") {
  ChannelParams p;
  NetworkGeometry g;
  FieldHistory h(p, g);
  const HistoryContext ctx = HistoryContext::from(h);
  CHECK(ctx.slot == 1);
  const Point c{20.0, 70.0};
  const ShadowPosterior post = condition(c, ctx);
  CHECK(post.mu_g == doctest::Approx(pathloss_log(c, g.dest_pos, p)));
  CHECK(post.mu_f == doctest::Approx(pathloss_log(c, g.source_pos, p)));
  CHECK(post.var_g == doctest::Approx(p.shadow_power + p.fading_var));
  CHECK(post.var_f() == doctest::Approx(p.shadow_power + p.fading_var));
  CHECK(post.cross_cov(0, 1) == doctest::Approx(p.shadow_power * std::exp(-30.0 / 50.0)));
}

TEST_CASE("perfect correlation limit recovers the observation") {
  ChannelParams p;
  p.corr_distance = 1e12;
  p.corr_time = 1e12;
  p.fading_var = 0.0;
  NetworkGeometry g;
  g.num_relays = 1;
  g.initial_positions = {{50.0, 40.0}};
  FieldHistory h(p, g);
  Rng rng(8);
  const SlotBlock obs = sample_next_slot(h, g.initial_positions, rng);
  const HistoryContext ctx = HistoryContext::from(h);
  const ShadowPosterior post = condition(g.initial_positions[0], ctx);
  CHECK(post.var_g < 1e-6);
  CHECK(post.var_f() < 1e-6);
  CHECK(post.mu_g == doctest::Approx(obs[0].g_log).epsilon(1e-6));
  CHECK(post.mu_f == doctest::Approx(obs[0].f_log).epsilon(1e-6));
}

TEST_CASE("triangular conditioning equals explicit-inverse conditioning") {
  ChannelParams p;
  NetworkGeometry g;
  g.num_relays = 2;
  g.initial_positions = {{45.0, 45.0}, {55.0, 55.0}};
  std::mt19937_64 rng(21);
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const int slots = 2 + inst % 2;
    FieldHistory h = random_history(p, g, slots, 100 + inst);
    const HistoryContext ctx = HistoryContext::from(h);
    const Point c = random_point(rng, 30.0, 70.0);
    const ShadowPosterior post = condition(c, ctx);
    const oracle::Gaussian2 ref = oracle::explicit_conditional(h, c, slots + 1, h.jitter());
    worst = std::max({worst, rel(post.mu_g, ref.mean(0)), rel(post.mu_f, ref.mean(1)),
                      rel(post.var_g, ref.cov(0, 0)), rel(post.var_f(), ref.cov(1, 1)),
                      rel(post.cross_cov(0, 1), ref.cov(0, 1))});
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("conditioned variance never exceeds the prior") {
  ChannelParams p;
  NetworkGeometry g;
  std::mt19937_64 rng(31);
  const double prior = p.shadow_power + p.fading_var;
  for (int inst = 0; inst < 30; ++inst) {
    FieldHistory h = random_history(p, g, 1 + inst % 6, 500 + inst);
    const HistoryContext ctx = HistoryContext::from(h);
    for (int k = 0; k < 20; ++k) {
      const ShadowPosterior post = condition(random_point(rng), ctx);
      CHECK(post.var_g <= prior + 1e-12);
      CHECK(post.var_f() <= prior + 1e-12);
      CHECK(post.var_g >= 0.0);
    }
  }
}

TEST_CASE("expected_g2 examples") {
  ChannelParams p;
  ShadowPosterior post;
  CHECK(expected_g2(post, p) == doctest::Approx(1.0).epsilon(1e-15));

  p.path_loss_exponent = 2.0;
  NetworkGeometry g;
  g.source_pos = {0.0, 5.0};
  g.dest_pos = {100.0, 0.0};
  g.region = {{-10.0, -10.0}, {110.0, 10.0}};
  FieldHistory h(p, g);
  const ShadowPosterior prior = condition({0.0, 0.0}, HistoryContext::from(h));
  const double expect = std::exp(-std::numbers::ln10 * 4.0 +
                                 std::numbers::ln10 * std::numbers::ln10 / 200.0 * 5.0);
  CHECK(expected_g2(prior, p) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(expected_g2(prior, p) == doctest::Approx(1.1418e-4).epsilon(1e-4));

  // Monte Carlo over G ~ N(mu_g, var_g), including a nonzero rho.
  p.fading_mean_db = 2.0;
  std::mt19937_64 rng(41);
  std::normal_distribution<double> n(prior.mu_g, std::sqrt(prior.var_g));
  double sum = 0.0;
  const int draws = 1000000;
  for (int k = 0; k < draws; ++k) sum += std::pow(10.0, (n(rng) + p.fading_mean_db) / 10.0);
  CHECK(rel(sum / draws, expected_g2(prior, p)) < 0.01);
}

TEST_CASE("expected_g2 is increasing in mean and variance") {
  ChannelParams p;
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> mu(-80.0, 0.0), var(0.0, 10.0);
  for (int k = 0; k < 200; ++k) {
    ShadowPosterior post;
    post.mu_g = mu(rng);
    post.var_g = var(rng);
    const double base = expected_g2(post, p);
    ShadowPosterior up = post;
    up.mu_g += 0.1;
    CHECK(expected_g2(up, p) > base);
    up = post;
    up.var_g += 0.1;
    CHECK(expected_g2(up, p) > base);
  }
}

TEST_CASE("expected_g2_over_f2 examples and Monte Carlo") {
  ShadowPosterior post;
  post.mu_g = post.mu_f = -30.0;
  post.cross_cov << 3.0, 3.0, 3.0, 3.0;
  CHECK(expected_g2_over_f2(post) == doctest::Approx(1.0).epsilon(1e-15));
  post.cross_cov << 50.0, 50.0, 50.0, 50.0;
  CHECK(expected_g2_over_f2(post) == doctest::Approx(1.0).epsilon(1e-15));

  post.mu_g = -45.0;
  post.mu_f = -38.0;
  post.cross_cov << 4.0, 1.2, 1.2, 3.0;
  post.var_g = 4.0;
  const Eigen::Matrix2d l = post.cross_cov.llt().matrixL();
  std::mt19937_64 rng(47);
  std::normal_distribution<double> n;
  double sum = 0.0;
  const int draws = 1000000;
  for (int k = 0; k < draws; ++k) {
    const Eigen::Vector2d z = l * Eigen::Vector2d(n(rng), n(rng));
    sum += std::pow(10.0, ((post.mu_g + z(0)) - (post.mu_f + z(1))) / 10.0);
  }
  CHECK(rel(sum / draws, expected_g2_over_f2(post)) < 0.01);
}

TEST_CASE("objective limits without the constraint penalty") {
  ChannelParams p;
  NetworkGeometry g;
  FieldHistory h = random_history(p, g, 3, 7);
  const ShadowPosterior post = condition({40.0, 30.0}, HistoryContext::from(h));
  ChannelParams q = p;
  q.sinr_threshold = 0.0;
  CHECK(objective_from_posterior(post, q) == expected_g2(post, q));
  CHECK(objective_from_posterior(post, q) > 0.0);
  q = p;
  q.relay_noise_power = 0.0;
  CHECK(objective_from_posterior(post, q) == expected_g2(post, q));
  CHECK(objective_E({40.0, 30.0}, HistoryContext::from(h)) ==
        doctest::Approx(objective_from_posterior(post, p)).epsilon(1e-15));
}

TEST_CASE("empty-history objective depends only on distances to the terminals") {
  ChannelParams p;
  NetworkGeometry g;
  g.region = {{-200.0, -200.0}, {200.0, 200.0}};
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  FieldHistory h(p, g);
  const HistoryContext ctx = HistoryContext::from(h);
  const Point mid = 0.5 * (g.source_pos + g.dest_pos);
  for (int k = 0; k < 50; ++k) {
    const Point c = random_point(rng);
    const double base = objective_E(c, ctx);
    // Rotation of the whole scene about the S-D midpoint.
    const Eigen::Rotation2Dd rot(angle(rng));
    NetworkGeometry gr = g;
    gr.source_pos = mid + rot * (g.source_pos - mid);
    gr.dest_pos = mid + rot * (g.dest_pos - mid);
    FieldHistory hr(p, gr);
    CHECK(objective_E(mid + rot * (c - mid), HistoryContext::from(hr)) ==
          doctest::Approx(base).epsilon(1e-12));
    // Reflection across the S-D axis.
    const Point mirrored{c.x(), 2.0 * mid.y() - c.y()};
    CHECK(objective_E(mirrored, ctx) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("high-SNR objective matches the exact conditional mean of B_11") {
  ChannelParams p;
  p.path_loss_exponent = 2.0;
  p.sinr_threshold = 1.0;
  p.relay_noise_power = 1e-4;  // P0 / sigma^2 = 1e4
  NetworkGeometry g;
  g.region = {{-10.0, -10.0}, {50.0, 10.0}};
  g.source_pos = {0.0, 0.0};
  g.dest_pos = {40.0, 0.0};
  g.num_relays = 1;
  g.initial_positions = {{5.0, 0.0}};
  FieldHistory h(p, g);
  Rng rng(61);
  sample_next_slot(h, g.initial_positions, rng);
  const Point c{6.0, 1.0};
  const double approx = objective_E(c, HistoryContext::from(h));

  const oracle::Gaussian2 law = oracle::explicit_conditional(h, c, 2);
  const Eigen::Matrix2d l = law.cov.llt().matrixL();
  std::mt19937_64 mc(67);
  std::normal_distribution<double> n;
  double sum = 0.0;
  const int draws = 1000000;
  const double s2 = p.relay_noise_power, p0 = p.source_power, zeta = p.sinr_threshold;
  for (int k = 0; k < draws; ++k) {
    const Eigen::Vector2d x = law.mean + l * Eigen::Vector2d(n(mc), n(mc));
    const double g2 = std::pow(10.0, x(0) / 10.0);
    const double f2 = std::pow(10.0, x(1) / 10.0);
    sum += g2 * (p0 * f2 - zeta * s2) / (p0 * f2 + s2);
  }
  CHECK(rel(approx, sum / draws) < 0.02);
}

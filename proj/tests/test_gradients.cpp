#include "syntone/objectives.hpp"
#include "syntone/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

using namespace syntone;
using namespace syntone::models;

namespace {

constexpr double kStep = 1e-4;
constexpr double kTolerance = 1e-4;
// Below this magnitude central differences at kStep are dominated by
// cancellation (about eps * |loss| / kStep).
constexpr double kFloor = 1e-5;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), kFloor});
  return std::abs(analytic - numeric) / scale;
}

/// Central differences on every coordinate; returns the worst relative error.
double check_gradient(std::vector<double> params, const std::vector<double>& analytic,
                      const std::function<double(const std::vector<double>&)>& loss, std::string* where) {
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + kStep;
    const double up = loss(params);
    params[i] = saved - kStep;
    const double down = loss(params);
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * kStep);
    const double err = relative_error(analytic[i], numeric);
    if (err > worst) {
      worst = err;
      *where = "param " + std::to_string(i) + " analytic=" + fmt(analytic[i]) +
               " numeric=" + fmt(numeric);
    }
  }
  return worst;
}

struct TinyProblem {
  NetworkSpec spec = NetworkSpec::tiny();
  ConvVae net{spec};
  Discriminator disc{spec.latent_dim};
  std::vector<double> params;
  std::vector<double> disc_params;
  Matrix x{4, 32};
  Matrix eps{4, 3};

  explicit TinyProblem(std::uint64_t seed) {
    params = net.init_params(seed);
    disc_params = disc.init_params(seed + 1);
    Rng rng(seed + 2);
    for (double& v : x.data) v = 3.0 * rng.normal();
    for (double& v : eps.data) v = rng.normal();
  }
};

void check_objective(const ObjectiveConfig& cfg) {
  TinyProblem s(31);
  const bool factor = cfg.kind == ObjectiveKind::FactorVae;
  const Discriminator* disc = factor ? &s.disc : nullptr;
  const std::span<const double> dp = factor ? std::span<const double>(s.disc_params) : std::span<const double>();
  const auto result = vae_batch(s.net, s.params, cfg, s.x, s.eps, 50, disc, dp, true);
  ASSERT_EQ(result.grad.size(), s.params.size());
  std::string where;
  const double worst = check_gradient(
      s.params, result.grad,
      [&](const std::vector<double>& p) { return vae_batch(s.net, p, cfg, s.x, s.eps, 50, disc, dp, false).loss.total; },
      &where);
  EXPECT_LT(worst, kTolerance) << where;
}

}  // namespace

TEST(GradientCheck, Vanilla) { check_objective(ObjectiveConfig::vanilla()); }

TEST(GradientCheck, BetaVae) { check_objective(ObjectiveConfig::beta_vae(4.0)); }

TEST(GradientCheck, FactorVae) { check_objective(ObjectiveConfig::factor_vae(10.0)); }

TEST(GradientCheck, BetaTcVae) { check_objective(ObjectiveConfig::beta_tcvae(1.0, 6.0, 1.0)); }

TEST(GradientCheck, BetaTcVaeUnevenWeights) { check_objective(ObjectiveConfig::beta_tcvae(0.5, 3.0, 2.0)); }

TEST(GradientCheck, Discriminator) {
  TinyProblem s(41);
  Rng rng(3);
  Matrix z(4, 3);
  for (double& v : z.data) v = rng.normal();
  const Matrix zp = permute_dims(z, 9);
  const auto result = discriminator_batch(s.disc, s.disc_params, z, zp, true);
  std::string where;
  const double worst = check_gradient(
      s.disc_params, result.grad,
      [&](const std::vector<double>& p) { return discriminator_batch(s.disc, p, z, zp, false).loss; }, &where);
  EXPECT_LT(worst, kTolerance) << where;
}

#include "syntone/network.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace syntone;
using namespace syntone::models;

TEST(NetworkSpec, StageShapes) {
  const NetworkSpec s;
  EXPECT_EQ(s.stage_shape(0), (std::array<int, 2>{64, 32}));
  EXPECT_EQ(s.stage_shape(4), (std::array<int, 2>{4, 2}));
  EXPECT_EQ(s.flat_size(), 64 * 4 * 2);
  const auto t = NetworkSpec::tiny();
  EXPECT_EQ(t.stage_shape(4), (std::array<int, 2>{1, 1}));
  EXPECT_EQ(t.latent_dim, 3);
}

TEST(NetworkSpec, RejectsBadSizes) {
  NetworkSpec s;
  s.latent_dim = 0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  EXPECT_THROW(ConvVae{s}, std::invalid_argument);
}

TEST(ConvVae, OutputShapes) {
  const ConvVae net(NetworkSpec{});
  const auto p = net.init_params(1);
  std::vector<double> x(64 * 32, 0.3);
  const auto q = net.encode(p, x);
  EXPECT_EQ(q.mu.size(), 8u);
  EXPECT_EQ(q.logvar.size(), 8u);
  const auto y = net.decode(p, q.mu);
  EXPECT_EQ(y.size(), 64u * 32u);
  for (double v : y) EXPECT_TRUE(std::isfinite(v));
}

TEST(ConvVae, ZeroNetworkIsZero) {
  const ConvVae net(NetworkSpec{});
  const std::vector<double> p(net.param_count(), 0.0);
  const std::vector<double> x(64 * 32, 0.0);
  const auto q = net.encode(p, x);
  for (double v : q.mu) EXPECT_EQ(v, 0.0);
  for (double v : q.logvar) EXPECT_EQ(v, 0.0);
  for (double v : net.decode(p, std::vector<double>(8, 0.0))) EXPECT_EQ(v, 0.0);
}

TEST(ConvVae, DeterministicInit) {
  const ConvVae net(NetworkSpec::tiny());
  EXPECT_EQ(net.init_params(3), net.init_params(3));
  EXPECT_NE(net.init_params(3), net.init_params(4));
  const auto p = net.init_params(3);
  for (const auto& e : net.layout().entries()) {
    std::size_t fan_in = 1;
    if (e.name.find("deconv") != std::string::npos) {
      continue;
    }
    if (e.shape.size() == 4) fan_in = e.shape[1] * e.shape[2] * e.shape[3];
    if (e.shape.size() == 2) fan_in = e.shape[1];
    if (e.shape.size() != 1) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (std::size_t i = 0; i < e.size; ++i) ASSERT_LE(std::abs(p[e.offset + i]), bound) << e.name;
    }
  }
}

TEST(ConvVae, LogvarClamped) {
  const ConvVae net(NetworkSpec::tiny());
  auto p = net.init_params(2);
  const auto& bias = net.layout().find("enc.fc2.bias");
  // The second half of fc2 produces logvar.
  for (std::size_t i = bias.size / 2; i < bias.size; ++i) p[bias.offset + i] = 50.0;
  const auto q = net.encode(p, std::vector<double>(32, 0.1));
  for (double v : q.logvar) EXPECT_EQ(v, kLogvarMax);
}

TEST(ConvVae, EncodeBitwiseRepeatable) {
  const ConvVae net(NetworkSpec{});
  const auto p = net.init_params(9);
  std::vector<double> x(64 * 32);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.01 * static_cast<double>(i)) * 5.0;
  const auto a = net.encode(p, x), b = net.encode(p, x);
  EXPECT_EQ(a.mu, b.mu);
  EXPECT_EQ(a.logvar, b.logvar);
}

TEST(ConvVae, ShapeMismatchRejected) {
  const ConvVae net(NetworkSpec::tiny());
  const auto p = net.init_params(1);
  EXPECT_THROW(net.encode(p, std::vector<double>(31, 0.0)), std::invalid_argument);
  EXPECT_THROW(net.decode(p, std::vector<double>(2, 0.0)), std::invalid_argument);
  EXPECT_THROW(net.encode(std::vector<double>(3, 0.0), std::vector<double>(32, 0.0)), std::invalid_argument);
}

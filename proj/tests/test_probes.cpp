#include "syntone/probes.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace syntone;
using namespace syntone::metrics;

namespace {

const std::vector<synth::FactorTuple>& grid400() {
  static const auto g = probe_grid({1, 4, 20});
  return g;
}

}  // namespace

TEST(ProbeGrid, SizesAndCycling) {
  EXPECT_EQ(grid400().size(), 400u);
  const auto big = probe_grid({1, 4, 20}, 10000);
  ASSERT_EQ(big.size(), 10000u);
  EXPECT_EQ(big[400], big[0]);
  EXPECT_EQ(big[9999], grid400()[9999 % 400]);
}

TEST(ProbeKind, Names) {
  for (auto k : {ProbeKind::Perfect, ProbeKind::Duplicated, ProbeKind::Entangled, ProbeKind::Noisy,
                 ProbeKind::Random, ProbeKind::Constant}) {
    EXPECT_EQ(probe_kind_from_name(probe_kind_name(k)), k);
  }
  EXPECT_THROW(probe_kind_from_name("bogus"), std::invalid_argument);
}

TEST(Probe, PerfectEndpointsExact) {
  // Exact only when every factor level lands in its own bin: 20 bins resolve
  // the strided grid, the full grid needs 400.
  for (const auto& [grid, bins] : {std::pair{grid400(), 20}, std::pair{probe_grid({1, 1, 1}), 400}}) {
    const auto rep = probe_representation(ProbeKind::Perfect, grid, 1);
    EXPECT_EQ(rep.latent_dim(), 8u);
    const auto m = mi_matrix(rep, bins);
    EXPECT_EQ(mig(m), 1.0);
    EXPECT_EQ(dcimig(m), 1.0);
    EXPECT_EQ(jemmig(m), 0.0);
    EXPECT_EQ(modularity(m), 1.0);
  }
}

TEST(Probe, PerfectSapScores) {
  const auto rep = probe_representation(ProbeKind::Perfect, grid400(), 1);
  const auto s = sap_scores(rep, 3);
  EXPECT_EQ(s(0, 0), 1.0);
  // Constant latents sit exactly at chance; the amp and freq latents are
  // independent of timbre and land near it on a finite split.
  for (std::size_t j = 3; j < 8; ++j) EXPECT_EQ(s(j, 0), 0.25) << j;
  for (std::size_t j = 1; j < 3; ++j) EXPECT_NEAR(s(j, 0), 0.25, 0.1) << j;
  const double v = sap(rep, 3);
  EXPECT_GT(v, 0.6);
  EXPECT_LE(v, 1.0);
}

TEST(Probe, DuplicatedLowersSap) {
  const auto perfect = probe_representation(ProbeKind::Perfect, grid400(), 1);
  const auto dup = probe_representation(ProbeKind::Duplicated, grid400(), 1);
  const auto s = sap_scores(dup, 3);
  EXPECT_EQ(s(0, 0), s(3, 0));
  EXPECT_LT(sap(dup, 3), sap(perfect, 3));
  EXPECT_LT(mig(mi_matrix(dup)), 1.0);
}

TEST(Probe, EntangledScoresBelowPerfect) {
  const auto m = mi_matrix(probe_representation(ProbeKind::Entangled, grid400(), 1));
  EXPECT_LT(mig(m), 1.0);
  EXPECT_LT(modularity(m), 1.0);
  EXPECT_GT(jemmig(m), 0.0);
}

TEST(Probe, RandomMigSmallAtTenThousandRows) {
  const auto grid = probe_grid({1, 4, 20}, 10000);
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto rep = probe_representation(ProbeKind::Random, grid, seed);
    EXPECT_EQ(rep.latent_dim(), 8u);
    total += mig(mi_matrix(rep));
  }
  EXPECT_LT(total / 10.0, 0.05);
}

TEST(Probe, NoisyJemmigIncreasesWithSigma) {
  double prev = -1.0;
  for (double sigma : {0.0, 0.1, 0.5, 1.0}) {
    const double j = jemmig(mi_matrix(probe_representation(ProbeKind::Noisy, grid400(), 4, sigma)));
    EXPECT_GT(j, prev) << sigma;
    prev = j;
  }
}

TEST(Probe, ConstantIsDegenerateForModularityOnly) {
  const auto rep = probe_representation(ProbeKind::Constant, grid400(), 1);
  const auto m = mi_matrix(rep);
  EXPECT_EQ(mig(m), 0.0);
  EXPECT_THROW(modularity(m), DegenerateError);
  const auto r = evaluate(rep, 3, 1);
  EXPECT_TRUE(r.mig.ok());
  EXPECT_EQ(r.mig.mean, 0.0);
  ASSERT_FALSE(r.modularity.ok());
  EXPECT_NE(r.modularity.error->find("degenerate representation"), std::string::npos);
}

TEST(Probe, Seeded) {
  const auto a = probe_representation(ProbeKind::Random, grid400(), 8);
  const auto b = probe_representation(ProbeKind::Random, grid400(), 8);
  const auto c = probe_representation(ProbeKind::Random, grid400(), 9);
  EXPECT_EQ(a.codes, b.codes);
  EXPECT_NE(a.codes, c.codes);
}

TEST(Invariance, LatentPermutation) {
  const auto rep = probe_representation(ProbeKind::Noisy, grid400(), 2, 0.3);
  Representation perm = rep;
  const std::vector<std::size_t> order{5, 2, 7, 0, 3, 1, 6, 4};
  for (std::size_t i = 0; i < rep.size(); ++i) {
    for (std::size_t j = 0; j < 8; ++j) perm.codes(i, j) = rep.codes(i, order[j]);
  }
  const auto a = mi_matrix(rep), b = mi_matrix(perm);
  EXPECT_NEAR(mig(a), mig(b), 1e-12);
  EXPECT_NEAR(jemmig(a), jemmig(b), 1e-12);
  EXPECT_NEAR(dcimig(a), dcimig(b), 1e-12);
  EXPECT_NEAR(modularity(a), modularity(b), 1e-12);
  EXPECT_NEAR(sap(rep, 5), sap(perm, 5), 1e-12);
}

TEST(Invariance, PositiveAffineMap) {
  const auto rep = probe_representation(ProbeKind::Noisy, grid400(), 3, 0.2);
  Representation mapped = rep;
  // Power-of-two scales and small integer shifts keep the bin edges exact.
  for (std::size_t i = 0; i < rep.size(); ++i) {
    for (std::size_t j = 0; j < 8; ++j) mapped.codes(i, j) = rep.codes(i, j) * 4.0 + static_cast<double>(j);
  }
  const auto a = mi_matrix(rep), b = mi_matrix(mapped);
  EXPECT_NEAR(mig(a), mig(b), 1e-9);
  EXPECT_NEAR(jemmig(a), jemmig(b), 1e-9);
  EXPECT_NEAR(dcimig(a), dcimig(b), 1e-9);
  EXPECT_NEAR(modularity(a), modularity(b), 1e-9);
}

TEST(Evaluate, PerfectProbeStdsVanish) {
  const auto r = evaluate(probe_representation(ProbeKind::Perfect, grid400(), 1), 10, 7);
  EXPECT_EQ(r.runs, 10);
  EXPECT_EQ(r.mig.mean, 1.0);
  EXPECT_EQ(r.dcimig.mean, 1.0);
  EXPECT_EQ(r.jemmig.mean, 0.0);
  EXPECT_EQ(r.modularity.mean, 1.0);
  EXPECT_LT(r.mig.std, 1e-6);
  EXPECT_LT(r.dcimig.std, 1e-6);
  EXPECT_LT(r.jemmig.std, 1e-6);
  EXPECT_LT(r.modularity.std, 1e-6);
  EXPECT_GE(r.sap.std, 0.0);
}

TEST(Evaluate, SingleRunHasZeroStd) {
  const auto r = evaluate(probe_representation(ProbeKind::Noisy, grid400(), 1, 0.5), 1, 7);
  EXPECT_EQ(r.mig.std, 0.0);
  EXPECT_EQ(r.sap.std, 0.0);
  EXPECT_EQ(r.dcimig.std, 0.0);
  EXPECT_EQ(r.jemmig.std, 0.0);
  EXPECT_EQ(r.modularity.std, 0.0);
}

TEST(Evaluate, DeterministicAndInRange) {
  const auto rep = probe_representation(ProbeKind::Random, grid400(), 2);
  const auto a = evaluate(rep, 5, 11), b = evaluate(rep, 5, 11);
  EXPECT_EQ(a.mig.mean, b.mig.mean);
  EXPECT_EQ(a.sap.std, b.sap.std);
  EXPECT_EQ(a.jemmig.mean, b.jemmig.mean);
  for (const auto* s : {&a.mig, &a.sap, &a.dcimig, &a.modularity}) {
    EXPECT_GE(s->mean, 0.0);
    EXPECT_LE(s->mean, 1.0);
    EXPECT_GE(s->std, 0.0);
  }
  EXPECT_GE(a.jemmig.mean, 0.0);
}

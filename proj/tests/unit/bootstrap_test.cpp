// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "scalelab/bootstrap.hpp"
#include "scalelab/error.hpp"
#include "test_support.hpp"

namespace scalelab {
namespace {

std::vector<LossPoint> noisy(double sigma, std::uint64_t seed) {
  return testing::synthetic_grid(testing::synthetic_truth(), sigma, seed);
}

TEST(MeanStd, SampleStatistics) {
  const std::vector<double> v{1, 2, 3, 4};
  const MeanStd s = mean_std(v);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.std, std::sqrt(5.0 / 3.0), 1e-15);
  const std::vector<double> one{1};
  EXPECT_THROW(mean_std(one), Error);
}

TEST(Bootstrap, IdenticalPointsHaveZeroSpread) {
  const std::vector<LossPoint> pts(12, {1e9, 1e11, 2.5});
  const BootstrapResult r = bootstrap(pts, {}, {10, 1, 3});
  for (const MeanStd& s : r.stats) EXPECT_LE(s.std, 1e-15 * std::max(1.0, std::abs(s.mean)));
  for (const auto& row : r.samples) EXPECT_EQ(row, r.samples.front());
}

TEST(Bootstrap, DeterministicAndThreadIndependent) {
  const auto pts = noisy(0.005, 5);
  FitConfig one;
  one.threads = 1;
  FitConfig three;
  three.threads = 3;
  const BootstrapResult a = bootstrap(pts, one, {8, 42, 3});
  EXPECT_EQ(a, bootstrap(pts, one, {8, 42, 3}));
  EXPECT_EQ(a, bootstrap(pts, three, {8, 42, 3}));
  EXPECT_NE(a.samples, bootstrap(pts, one, {8, 43, 3}).samples);
}

TEST(Bootstrap, ClosedFormColumnsAreConsistent) {
  const BootstrapResult r = bootstrap(noisy(0.005, 6), {}, {6, 2, 3});
  for (const auto& row : r.samples) {
    const double alpha = row[1], beta = row[2], a = row[3], b = row[4], d = row[5];
    EXPECT_NEAR(a, beta / (alpha + beta), 1e-12);
    EXPECT_NEAR(a + b, 1.0, 1e-15);
    EXPECT_NEAR(d, b / a, 1e-12);
  }
}

TEST(Bootstrap, MeansTrackFullFitAtLowNoise) {
  const auto pts = noisy(0.001, 8);
  const BootstrapResult r = bootstrap(pts, {}, {20, 4, 3});
  const auto full = r.full_fit;
  EXPECT_LT(testing::rel_err(r[BootstrapCoef::kAlpha].mean, full.alpha), 0.02);
  EXPECT_LT(testing::rel_err(r[BootstrapCoef::kBeta].mean, full.beta), 0.02);
  EXPECT_LT(testing::rel_err(r[BootstrapCoef::kE].mean, full.e_irreducible), 0.02);
}

TEST(Bootstrap, RejectsSingleIteration) { EXPECT_THROW(bootstrap(noisy(0.01, 1), {}, {1, 0, 3}), Error); }

TEST(Bootstrap, FailuresNameTheIteration) {
  FitConfig cfg;
  cfg.max_iterations = 1;
  cfg.init_grid_a_b = {30};
  cfg.init_grid_alpha_beta = {2.5};
  cfg.init_grid_e = {1};
  try {
    bootstrap(noisy(0.01, 1), cfg, {3, 0, 3});
    FAIL();
  } catch (const Error& e) {
    // The full-data fit fails before any resample.
    EXPECT_EQ(e.code(), ErrorCode::kAllInitsFailed);
  }
}

TEST(BootstrapCoef, Names) {
  EXPECT_EQ(to_string(BootstrapCoef::kE), "E");
  EXPECT_EQ(to_string(BootstrapCoef::kD), "d");
}

}  // namespace
}  // namespace scalelab

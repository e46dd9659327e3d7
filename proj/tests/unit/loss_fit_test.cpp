// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "scalelab/error.hpp"
#include "scalelab/loss_fit.hpp"
#include "scalelab/rng.hpp"
#include "test_support.hpp"

namespace scalelab {
namespace {

using testing::rel_err;

std::vector<LossPoint> synthetic(const LossSurfaceFit& truth) {
  std::vector<LossPoint> pts;
  for (double n : {2.75e8, 4.64e8, 9.32e8, 1.627e9, 2.28e9, 3.354e9}) {
    for (int j = 0; j < 10; ++j) {
      const double d = 1e10 * std::pow(60.0, j / 9.0);
      pts.push_back({n, d, predict_loss(truth, n, d)});
    }
  }
  return pts;
}

LossSurfaceFit truth_fit() {
  LossSurfaceFit t;
  t.e_irreducible = 1.9;
  t.a_coef = 460;
  t.b_coef = 330;
  t.alpha = 0.30;
  t.beta = 0.34;
  return t;
}

// Direct evaluation of the objective from its definition.
double objective_oracle(const SurfaceParams& p, const std::vector<LossPoint>& pts, double delta) {
  double sum = 0;
  for (const LossPoint& q : pts) {
    const double pred = std::exp(p.a - p.alpha * std::log(q.n)) + std::exp(p.b - p.beta * std::log(q.d)) +
                        std::exp(p.e);
    const double r = std::log(pred) - std::log(q.loss);
    sum += std::abs(r) <= delta ? 0.5 * r * r : delta * (std::abs(r) - 0.5 * delta);
  }
  return sum;
}

TEST(Huber, Branches) {
  EXPECT_DOUBLE_EQ(huber(1e-4, 1e-3), 0.5e-8);
  EXPECT_DOUBLE_EQ(huber(-2e-3, 1e-3), 1e-3 * (2e-3 - 0.5e-3));
  EXPECT_DOUBLE_EQ(huber_derivative(5e-4, 1e-3), 5e-4);
  EXPECT_DOUBLE_EQ(huber_derivative(-5, 1e-3), -1e-3);
  // Continuity at the transition.
  EXPECT_NEAR(huber(1e-3 - 1e-15, 1e-3), huber(1e-3 + 1e-15, 1e-3), 1e-17);
}

TEST(Objective, ZeroResidualHasZeroValueAndGradient) {
  const SurfaceParams p{5.0, 6.0, 0.5, 0.3, 0.35};
  const double n = 1e9, d = 1e11;
  const double lse = std::log(std::exp(p.a - p.alpha * std::log(n)) + std::exp(p.b - p.beta * std::log(d)) +
                              std::exp(p.e));
  const std::vector<LossPoint> pts{{n, d, std::exp(lse)}};
  const ObjectiveValue v = huber_lse_objective(p, pts, 1e-3);
  EXPECT_NEAR(v.value, 0.0, 1e-28);
  for (double g : v.gradient) EXPECT_NEAR(g, 0.0, 1e-14);
}

TEST(Objective, QuadraticBranchForTinyResiduals) {
  const SurfaceParams p{5.0, 6.0, 0.5, 0.3, 0.35};
  std::vector<LossPoint> pts;
  for (int i = 0; i < 5; ++i) {
    const double n = 1e8 * (i + 1), d = 3e10 * (i + 2);
    const double pred = std::exp(p.a - p.alpha * std::log(n)) + std::exp(p.b - p.beta * std::log(d)) +
                        std::exp(p.e);
    pts.push_back({n, d, pred * std::exp(-1e-4)});
  }
  EXPECT_NEAR(huber_lse_objective(p, pts, 1e-3).value, 5 * 0.5 * 1e-8, 1e-18);
}

TEST(Objective, MatchesDirectEvaluation) {
  const std::vector<LossPoint> pts = synthetic(truth_fit());
  const SurfaceParams p{4.0, 7.0, 0.2, 0.25, 0.4};
  EXPECT_NEAR(huber_lse_objective(p, pts, 1e-3).value, objective_oracle(p, pts, 1e-3), 1e-12);
}

TEST(Objective, GradientMatchesCentralDifferences) {
  Xoshiro256 rng(7);
  std::vector<LossPoint> pts;
  for (int i = 0; i < 20; ++i) {
    pts.push_back({std::exp(18 + 4 * rng.uniform()), std::exp(23 + 4 * rng.uniform()), 1.8 + rng.uniform()});
  }
  for (int trial = 0; trial < 25; ++trial) {
    const SurfaceParams p{10 * rng.uniform(), 10 * rng.uniform(), rng.uniform() - 0.5, 0.1 + 0.6 * rng.uniform(),
                          0.1 + 0.6 * rng.uniform()};
    const ObjectiveValue v = huber_lse_objective(p, pts, 1e-3);
    auto x = p.as_array();
    for (int k = 0; k < 5; ++k) {
      auto hi = x, lo = x;
      hi[k] += 1e-6;
      lo[k] -= 1e-6;
      const double fd = (objective_oracle(SurfaceParams::from_span(hi), pts, 1e-3) -
                         objective_oracle(SurfaceParams::from_span(lo), pts, 1e-3)) /
                        2e-6;
      EXPECT_LT(std::abs(v.gradient[k] - fd), 1e-5 * std::max(std::abs(fd), 1e-3)) << "coordinate " << k;
    }
  }
}

TEST(Objective, PermutationInvariant) {
  std::vector<LossPoint> pts = synthetic(truth_fit());
  for (auto& q : pts) q.loss *= 1.01;
  const SurfaceParams p{6.0, 5.5, 0.6, 0.3, 0.3};
  const double before = huber_lse_objective(p, pts, 1e-3).value;
  std::reverse(pts.begin(), pts.end());
  std::rotate(pts.begin(), pts.begin() + 17, pts.end());
  EXPECT_NEAR(huber_lse_objective(p, pts, 1e-3).value, before, 1e-12 * before);
}

TEST(Objective, NonFiniteRaises) {
  const std::vector<LossPoint> pts{{1e9, 1e11, 2.0}};
  try {
    huber_lse_objective({1e308, 0, 0, -1e308, 0}, pts, 1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteObjective);
  }
}

TEST(Reparameterization, LseMatchesSum) {
  const LossSurfaceFit f = truth_fit();
  const SurfaceParams p = to_log_params(f);
  for (double n : {1.0, 3e8, 7e10}) {
    for (double d : {1.0, 2e10, 9e12}) {
      const double t0 = p.a - p.alpha * std::log(n), t1 = p.b - p.beta * std::log(d), t2 = p.e;
      const double m = std::max({t0, t1, t2});
      const double lse = m + std::log(std::exp(t0 - m) + std::exp(t1 - m) + std::exp(t2 - m));
      EXPECT_LT(rel_err(std::exp(lse), predict_loss(f, n, d)), 1e-12);
    }
  }
}

TEST(InitializationGrid, SizeAndOrder) {
  const FitConfig cfg;
  const auto grid = initialization_grid(cfg);
  ASSERT_EQ(grid.size(), 7u * 7u * 4u * 3u * 3u);
  EXPECT_EQ(grid[0], (SurfaceParams{0, 0, -1, 0, 0}));
  EXPECT_EQ(grid[1], (SurfaceParams{0, 0, -1, 0, 0.5}));
  EXPECT_EQ(grid[3], (SurfaceParams{0, 0, -1, 0.5, 0}));
  EXPECT_EQ(grid[9], (SurfaceParams{0, 0, -0.5, 0, 0}));
  EXPECT_EQ(grid.back(), (SurfaceParams{30, 30, 1, 2.5, 2.5}));
  for (const auto& s : grid) EXPECT_NE(s.e, 0.0);
}

TEST(FitConfig, Validation) {
  FitConfig cfg;
  cfg.huber_delta = 0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.init_grid_e.clear();
  EXPECT_THROW(cfg.validate(), Error);
  cfg = {};
  cfg.gradient_tolerance = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Fit, RecoversNoiselessSynthetic) {
  const LossSurfaceFit truth = truth_fit();
  const LossSurfaceFit fit = fit_loss_surface(synthetic(truth), {});
  EXPECT_TRUE(fit.converged);
  EXPECT_LT(rel_err(fit.alpha, truth.alpha), 0.01);
  EXPECT_LT(rel_err(fit.beta, truth.beta), 0.01);
  EXPECT_LT(rel_err(fit.e_irreducible, truth.e_irreducible), 0.01);
  EXPECT_NO_THROW(validate(fit));
}

TEST(Fit, TooFewPoints) {
  std::vector<LossPoint> pts(5, {1e9, 1e11, 2.5});
  try {
    fit_loss_surface(pts, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewPoints);
  }
}

TEST(Fit, RepeatedSinglePointInterpolates) {
  const std::vector<LossPoint> pts(10, {1e9, 1e11, 2.5});
  const LossSurfaceFit fit = fit_loss_surface(pts, {});
  EXPECT_TRUE(fit.converged);
  EXPECT_LT(fit.objective, 1e-12);
  EXPECT_NEAR(predict_loss(fit, 1e9, 1e11), 2.5, 1e-5);
}

TEST(Fit, DeterministicAndThreadIndependent) {
  auto runs = testing::fixture_runs("early_45-45-10.csv");
  const auto pts = loss_points(runs);
  FitConfig one;
  one.threads = 1;
  FitConfig four;
  four.threads = 4;
  const LossSurfaceFit a = fit_loss_surface(pts, one);
  const LossSurfaceFit b = fit_loss_surface(pts, four);
  const LossSurfaceFit c = fit_loss_surface(pts, one);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(Fit, TieBreakPrefersLowestIndex) {
  // Identical starts reach identical objectives; the first one must win.
  const auto pts = synthetic(truth_fit());
  const std::vector<SurfaceParams> starts(3, SurfaceParams{6, 6, 0.5, 0.3, 0.3});
  const FitReport report = fit_from_starts(pts, starts, {});
  EXPECT_EQ(report.fit.winning_init_index, 0);
  ASSERT_EQ(report.starts.size(), 3u);
}

TEST(Fit, AllInitsFailedWhenNothingConverges) {
  FitConfig cfg;
  cfg.max_iterations = 1;
  const auto pts = synthetic(truth_fit());
  const std::vector<SurfaceParams> starts{{30, 30, 1, 2.5, 2.5}};
  try {
    fit_from_starts(pts, starts, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAllInitsFailed);
  }
}

TEST(PredictLoss, FloorMonotoneAndReferencePoint) {
  LossSurfaceFit floor = truth_fit();
  floor.a_coef = std::exp(-800.0);
  floor.b_coef = std::exp(-800.0);
  EXPECT_DOUBLE_EQ(predict_loss(floor, 1e9, 1e11), floor.e_irreducible);

  const LossSurfaceFit f = truth_fit();
  for (double n : {1e6, 1e9}) {
    EXPECT_LT(predict_loss(f, 2 * n, 1e11), predict_loss(f, n, 1e11));
    EXPECT_LT(predict_loss(f, n, 2e11), predict_loss(f, n, 1e11));
    EXPECT_GT(predict_loss(f, n, 1e11), f.e_irreducible);
  }
  // First point of the 8.13B series: observed 2.70, predicted 2.66.
  const double pred = predict_loss(testing::reference_early_fit(), 8.13e9, 5e10);
  EXPECT_NEAR(pred, 2.66, 0.05);
  EXPECT_NEAR(pred, 2.70, 0.05);
  EXPECT_THROW(predict_loss(f, 0.5, 1e11), Error);
}

TEST(LossPoints, UseActiveParametersForMoe) {
  RunFields f;
  f.run_id = "m";
  f.arch = Arch::kMoeAgnostic;
  f.n_active = 1e9;
  f.n_total = 8e9;
  f.tokens = 1e11;
  f.mixture = "45-45-10";
  f.loss = 2.4;
  const std::vector<RunRecord> runs{RunRecord(f)};
  const auto pts = loss_points(runs);
  EXPECT_EQ(pts[0].n, 1e9);
  EXPECT_EQ(pts[0].d, 1e11);
}

}  // namespace
}  // namespace scalelab

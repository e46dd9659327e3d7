// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "scalelab/error.hpp"
#include "scalelab/rng.hpp"
#include "scalelab/sparse_fit.hpp"
#include "test_support.hpp"

namespace scalelab {
namespace {

SparseLossSurfaceFit generator() {
  SparseLossSurfaceFit t;
  t.e_irr = 1.0788;
  t.a_coef = 1;
  t.b_coef = 4660;
  t.alpha = 0.589;
  t.beta = 0.372;
  t.lam = 0.2;
  t.delta_s = 0.2;
  t.gamma = 0.70956;
  t.c_coef = 1.0788;
  t.d_coef = 381475;
  return t;
}

std::vector<SparsePoint> synthetic(const std::vector<double>& levels) {
  std::vector<SparsePoint> pts;
  for (double s : levels) {
    for (double n : {2.75e8, 4.64e8, 9.32e8, 1.627e9, 2.28e9, 3.354e9}) {
      for (int j = 0; j < 10; ++j) {
        const double d = 1e10 * std::pow(60.0, j / 9.0);
        pts.push_back({n, d, s, predict_sparse_loss(generator(), n, d, s)});
      }
    }
  }
  return pts;
}

// Five-term sum written out directly.
double direct_loss(const SparseLossSurfaceFit& f, double n, double d, double s) {
  return f.e_irr + f.a_coef / std::pow(n, f.alpha) + f.b_coef / std::pow(d, f.beta) +
         f.c_coef / std::pow(1 - s, f.lam) + f.d_coef / (std::pow(1 - s, f.delta_s) * std::pow(n, f.gamma));
}

TEST(SparsePredict, MatchesDirectSum) {
  for (double s : {0.0, 0.3, 0.875}) {
    const double want = direct_loss(generator(), 1e9, 1e11, s);
    EXPECT_NEAR(predict_sparse_loss(generator(), 1e9, 1e11, s), want, 1e-12 * want);
  }
}

TEST(SparsePredict, DenseIdentityAtZeroSparsity) {
  const SparseLossSurfaceFit f = generator();
  for (double n : {1e8, 3e9, 7e10}) {
    for (double d : {1e10, 4e11}) {
      LossSurfaceFit dense;
      dense.e_irreducible = f.e_irr + f.c_coef + f.d_coef / std::pow(n, f.gamma);
      dense.a_coef = f.a_coef;
      dense.b_coef = f.b_coef;
      dense.alpha = f.alpha;
      dense.beta = f.beta;
      EXPECT_NEAR(predict_sparse_loss(f, n, d, 0.0), predict_loss(dense, n, d), 1e-10);
    }
  }
}

TEST(SparsePredict, IncreasesWithSparsity) {
  double prev = 0;
  for (double s : {0.0, 0.25, 0.5, 0.75, 0.875, 0.95}) {
    const double l = predict_sparse_loss(generator(), 1e9, 1e11, s);
    EXPECT_GT(l, prev);
    prev = l;
  }
}

TEST(SparseObjective, GradientMatchesCentralDifferences) {
  auto pts = synthetic({0.0, 0.5, 0.875});
  Xoshiro256 rng(17);
  for (SparsePoint& p : pts) p.loss *= std::exp(0.01 * rng.normal());
  for (int trial = 0; trial < 25; ++trial) {
    std::array<double, 10> x{};
    const double lo[10] = {0, 0, -1, 5, -1, 0.1, 0.1, 0.05, 0.05, 0.2};
    const double hi[10] = {10, 10, 1, 15, 1, 0.9, 0.6, 0.8, 0.8, 1.2};
    for (int k = 0; k < 10; ++k) x[k] = lo[k] + (hi[k] - lo[k]) * rng.uniform();
    const double delta = trial % 2 ? 1e-3 : 10.0;
    const auto at = [&](const std::array<double, 10>& v) {
      return sparse_objective(SparseParams::from_span(v), pts, delta).value;
    };
    const auto g = sparse_objective(SparseParams::from_span(x), pts, delta).gradient;
    for (int k = 0; k < 10; ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(x[k]));
      auto up = x, down = x;
      up[k] += h;
      down[k] -= h;
      const double fd = (at(up) - at(down)) / (2 * h);
      EXPECT_NEAR(g[k], fd, 1e-5 * std::max(1.0, std::abs(fd))) << "trial " << trial << " k " << k;
    }
  }
}

TEST(FitSparse, DenseReductionMatchesDenseFit) {
  LossSurfaceFit truth;
  truth.e_irreducible = 1.9;
  truth.a_coef = 460;
  truth.b_coef = 330;
  truth.alpha = 0.30;
  truth.beta = 0.34;
  std::vector<SparsePoint> sparse;
  std::vector<LossPoint> dense;
  for (double n : {2.75e8, 4.64e8, 9.32e8, 1.627e9, 2.28e9, 3.354e9}) {
    for (int j = 0; j < 10; ++j) {
      const double d = 1e10 * std::pow(60.0, j / 9.0);
      const double l = predict_loss(truth, n, d);
      sparse.push_back({n, d, 0.0, l});
      dense.push_back({n, d, l});
    }
  }
  SparseFitConfig cfg;
  cfg.fixed_lambda = 0.2;
  cfg.fixed_delta = 0.2;
  cfg.fixed_gamma = 0.0;
  const SparseLossSurfaceFit s = fit_sparse(sparse, cfg);
  const LossSurfaceFit d = fit_loss_surface(dense);
  EXPECT_LT(testing::rel_err(s.alpha, d.alpha), 0.01);
  EXPECT_LT(testing::rel_err(s.beta, d.beta), 0.01);
  EXPECT_EQ(s.lam, 0.2);
  EXPECT_EQ(s.gamma, 0.0);
}

TEST(FitSparse, RecoversGammaAtTwoLevels) {
  const SparseLossSurfaceFit f = fit_sparse(synthetic({0.5, 0.875}));
  EXPECT_LT(testing::rel_err(f.gamma, 0.70956), 0.05);
  EXPECT_LT(testing::rel_err(f.delta_s, 0.2), 0.05);
  EXPECT_LT(f.objective, 1e-9);
}

TEST(FitSparse, RecoversLambdaAtThreeLevels) {
  const SparseLossSurfaceFit f = fit_sparse(synthetic({0.0, 0.5, 0.875}));
  EXPECT_LT(testing::rel_err(f.lam, 0.2), 0.05);
  EXPECT_LT(testing::rel_err(f.gamma, 0.70956), 0.05);
}

TEST(FitSparse, Errors) {
  auto pts = synthetic({0.5});
  try {
    fit_sparse(pts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateSparsity);
  }
  pts.resize(9);
  try {
    fit_sparse(pts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewPoints);
  }
  SparseFitConfig bad;
  bad.dense_seeds = 0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(SparsePoints, FromMoeRuns) {
  const auto runs = testing::fixture_runs("moe_45-45-10.csv");
  const auto pts = sparse_points(runs);
  ASSERT_EQ(pts.size(), runs.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_DOUBLE_EQ(pts[i].sparsity, 0.875);
    EXPECT_EQ(pts[i].n, runs[i].n_active());
  }
}

}  // namespace
}  // namespace scalelab

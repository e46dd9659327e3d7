// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "scalelab/ingest.hpp"
#include "scalelab/loss_fit.hpp"
#include "scalelab/rng.hpp"
#include "scalelab/types.hpp"

namespace scalelab::testing {

inline std::string fixture(const std::string& name) { return std::string(SCALELAB_FIXTURE_DIR) + "/" + name; }

inline std::vector<RunRecord> select(const std::vector<RunRecord>& runs, EvalSet eval_set,
                                     const std::string& mixture = {}) {
  std::vector<RunRecord> out;
  for (const RunRecord& r : runs) {
    if (r.eval_set() == eval_set && (mixture.empty() || r.mixture() == mixture)) out.push_back(r);
  }
  return out;
}

inline std::vector<RunRecord> fixture_runs(const std::string& name, EvalSet eval_set = EvalSet::kAvg,
                                           const std::string& mixture = {}) {
  return select(load_fixture(fixture(name)), eval_set, mixture);
}

// Published early-fusion AVG coefficients. A and B are not
// published; these values reproduce the observed-vs-predicted figure.
inline LossSurfaceFit reference_early_fit() {
  LossSurfaceFit f;
  f.e_irreducible = 1.904;
  f.a_coef = 257.36;
  f.b_coef = 1877.2;
  f.alpha = 0.301;
  f.beta = 0.335;
  f.converged = true;
  return f;
}

// Straight-line least squares in long double, written independently of the
// library's regression code.
struct LineOracle {
  long double slope;
  long double intercept;
};

inline LineOracle line_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  long double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const long double n = static_cast<long double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += static_cast<long double>(x[i]) * x[i];
    sxy += static_cast<long double>(x[i]) * y[i];
  }
  const long double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope, (sy - slope * sx) / n};
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }


// Loss surface from which the synthetic recovery data are drawn.
inline LossSurfaceFit synthetic_truth() {
  LossSurfaceFit t;
  t.e_irreducible = 1.9;
  t.a_coef = 460;
  t.b_coef = 330;
  t.alpha = 0.30;
  t.beta = 0.34;
  return t;
}

// 6 x 10 grid, N log-spaced over 1e6..1e10 and D over 1e7..1e12, with
// multiplicative log-normal noise of width sigma.
inline std::vector<LossPoint> synthetic_grid(const LossSurfaceFit& truth, double sigma, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  std::vector<LossPoint> pts;
  for (int i = 0; i < 6; ++i) {
    const double n = 1e6 * std::pow(1e4, i / 5.0);
    for (int j = 0; j < 10; ++j) {
      const double d = 1e7 * std::pow(1e5, j / 9.0);
      const double l = predict_loss(truth, n, d);
      pts.push_back({n, d, sigma > 0 ? l * std::exp(sigma * rng.normal()) : l});
    }
  }
  return pts;
}

// Random fit documents for round-trip checks. Magnitudes span many decades
// and mantissas use all 52 bits.
inline double random_positive(Xoshiro256& rng) { return std::exp(rng.uniform() * 1200.0 - 600.0); }
inline double random_real(Xoshiro256& rng) {
  const double m = random_positive(rng);
  return rng.below(2) ? m : -m;
}

inline LossSurfaceFit random_loss_fit(Xoshiro256& rng) {
  LossSurfaceFit f;
  f.e_irreducible = random_positive(rng);
  f.a_coef = random_positive(rng);
  f.b_coef = random_positive(rng);
  f.alpha = random_real(rng);
  f.beta = random_real(rng);
  f.objective = rng.below(4) == 0 ? 0.0 : random_positive(rng);
  f.winning_init_index = static_cast<int>(rng.below(1764));
  f.converged = rng.below(2) == 1;
  f.huber_delta = random_positive(rng);
  return f;
}

inline SparseLossSurfaceFit random_sparse_fit(Xoshiro256& rng) {
  SparseLossSurfaceFit f;
  f.e_irr = random_positive(rng);
  f.a_coef = random_positive(rng);
  f.b_coef = random_positive(rng);
  f.alpha = random_real(rng);
  f.beta = random_real(rng);
  f.lam = random_real(rng);
  f.delta_s = random_real(rng);
  f.gamma = random_real(rng);
  f.c_coef = random_positive(rng);
  f.d_coef = random_positive(rng);
  f.objective = random_positive(rng);
  f.converged = rng.below(2) == 1;
  return f;
}

inline PowerLawFit random_power_law(Xoshiro256& rng) {
  PowerLawFit law;
  law.k = random_positive(rng);
  law.p = random_real(rng);
  law.x_min = random_positive(rng);
  law.x_max = law.x_min * (1.5 + rng.uniform() * 1e6);
  law.r_squared = 1 - random_positive(rng);
  return law;
}

inline FrontierLaws random_frontier(Xoshiro256& rng) {
  FrontierLaws laws{random_power_law(rng), random_power_law(rng), random_power_law(rng), random_power_law(rng)};
  if (rng.below(2)) {
    laws.source = FrontierSource::kClosedForm;
    const double a = rng.uniform();
    laws.n_of_c.p = a;
    laws.d_of_c.p = 1 - a;
  }
  return laws;
}

}  // namespace scalelab::testing

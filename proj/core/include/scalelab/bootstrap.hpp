// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "scalelab/loss_fit.hpp"

namespace scalelab {

struct MeanStd {
  double mean = 0;
  double std = 0;  // sample standard deviation, divisor n - 1

  bool operator==(const MeanStd&) const = default;
};

// Coefficients tracked per resample. a, b, d come from the closed form.
enum class BootstrapCoef { kE, kAlpha, kBeta, kA, kB, kD };
inline constexpr std::array<BootstrapCoef, 6> kBootstrapCoefs{
    BootstrapCoef::kE, BootstrapCoef::kAlpha, BootstrapCoef::kBeta,
    BootstrapCoef::kA, BootstrapCoef::kB,     BootstrapCoef::kD};
std::string_view to_string(BootstrapCoef coef);

struct BootstrapConfig {
  int iterations = 100;
  std::uint64_t seed = 0;
  int fallback_inits = 3;  // best grid starts tried besides the warm start
};

struct BootstrapResult {
  int iterations = 0;
  std::uint64_t seed = 0;
  LossSurfaceFit full_fit;
  std::array<MeanStd, 6> stats{};                 // indexed like kBootstrapCoefs
  std::vector<std::array<double, 6>> samples;     // one row per iteration

  const MeanStd& operator[](BootstrapCoef coef) const { return stats[static_cast<int>(coef)]; }
  bool operator==(const BootstrapResult&) const = default;
};

// Resamples P = points.size() points with replacement per iteration and
// refits from the full-data optimum and the best grid starts, retrying the
// whole grid when none of those converge. Iteration i draws from the stream (seed, i), so the result does not
// depend on config.threads. Fit failures abort with kBootstrapFailed naming
// the iteration.
BootstrapResult bootstrap(std::span<const LossPoint> points, const FitConfig& config,
                          const BootstrapConfig& boot);

// Sample mean and standard deviation (n - 1 divisor).
MeanStd mean_std(std::span<const double> values);

}  // namespace scalelab

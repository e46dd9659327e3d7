// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "scalelab/types.hpp"

namespace scalelab {

// Training compute in FLOPs.

inline constexpr double kDefaultVisionTokenFraction = 0.544;

// 6 N D.
double early_flops(double n_params, double tokens);

// 6 (N_v * f D + N_dec * D): the vision encoder only sees the image share f
// of the tokens.
double late_flops(double n_vision, double n_decoder, double tokens, double vision_token_fraction);

// 6 N_active D.
double moe_flops(double n_active, double tokens);

// Dispatches on the run's architecture. Late-fusion runs without an explicit
// fraction use kDefaultVisionTokenFraction.
double run_flops(const RunRecord& run);

}  // namespace scalelab

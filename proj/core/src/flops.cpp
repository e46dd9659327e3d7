// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "scalelab/flops.hpp"

#include <cmath>

#include "scalelab/error.hpp"

namespace scalelab {

namespace {

void check_positive(double v, const char* name) {
  if (!(std::isfinite(v) && v >= 1)) {
    raise(ErrorCode::kInvalidArgument, std::string(name) + " must be >= 1", name);
  }
}

}  // namespace

double early_flops(double n_params, double tokens) {
  check_positive(n_params, "n");
  check_positive(tokens, "d");
  return 6.0 * n_params * tokens;
}

double late_flops(double n_vision, double n_decoder, double tokens, double vision_token_fraction) {
  check_positive(n_vision, "n_vision");
  check_positive(n_decoder, "n_decoder");
  check_positive(tokens, "d");
  if (!(vision_token_fraction >= 0 && vision_token_fraction <= 1)) {
    raise(ErrorCode::kInvalidArgument, "vision token fraction must lie in [0, 1]", "vision_frac");
  }
  return early_flops(n_decoder, tokens) + 6.0 * n_vision * vision_token_fraction * tokens;
}

double moe_flops(double n_active, double tokens) { return early_flops(n_active, tokens); }

double run_flops(const RunRecord& run) {
  switch (run.arch()) {
    case Arch::kEarly:
      return early_flops(run.n_total(), run.tokens());
    case Arch::kLate: {
      const double nv = *run.n_vision();
      return late_flops(nv, run.n_total() - nv, run.tokens(),
                        run.vision_token_fraction().value_or(kDefaultVisionTokenFraction));
    }
    case Arch::kMoeAgnostic:
    case Arch::kMoeAware:
      return moe_flops(run.n_active(), run.tokens());
  }
  return 0;
}

}  // namespace scalelab

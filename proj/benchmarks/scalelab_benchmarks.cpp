// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "scalelab/compute_hull.hpp"
#include "scalelab/frontier.hpp"
#include "scalelab/ingest.hpp"
#include "scalelab/loss_fit.hpp"

namespace {

using namespace scalelab;

const std::vector<RunRecord>& early_runs() {
  static const std::vector<RunRecord> runs = [] {
    std::vector<RunRecord> out;
    for (const RunRecord& r : load_fixture(std::string(SCALELAB_FIXTURE_DIR) + "/early_45-45-10.csv")) {
      if (r.eval_set() == EvalSet::kAvg) out.push_back(r);
    }
    return out;
  }();
  return runs;
}

LossSurfaceFit reference_fit() {
  LossSurfaceFit f;
  f.e_irreducible = 1.904;
  f.a_coef = 257.36;
  f.b_coef = 1877.2;
  f.alpha = 0.301;
  f.beta = 0.335;
  return f;
}

void BM_Objective(benchmark::State& state) {
  const auto pts = loss_points(early_runs());
  const SurfaceParams p{5.5, 7.5, 0.64, 0.3, 0.33};
  for (auto _ : state) benchmark::DoNotOptimize(huber_lse_objective(p, pts, 1e-3));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(pts.size()));
}
BENCHMARK(BM_Objective);

void BM_FitLossSurface(benchmark::State& state) {
  const auto pts = loss_points(early_runs());
  FitConfig cfg;
  cfg.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_loss_surface(pts, cfg));
}
BENCHMARK(BM_FitLossSurface)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_HullLaw(benchmark::State& state) {
  const SeriesMap series = series_from_runs(early_runs());
  for (auto _ : state) benchmark::DoNotOptimize(fit_compute_law(frontier_points(series)));
}
BENCHMARK(BM_HullLaw)->Unit(benchmark::kMicrosecond);

void BM_RegressFrontier(benchmark::State& state) {
  const auto budgets = run_flops_values(early_runs());
  DGridConfig grid;
  grid.refine = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(regress_frontier(reference_fit(), BudgetRelation::early(), budgets, grid, 1));
}
BENCHMARK(BM_RegressFrontier)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();

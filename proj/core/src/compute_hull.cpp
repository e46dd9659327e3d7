// Copyright 2026 The scalelab Authors
// SPDX-License-Identifier: Apache-2.0

#include "scalelab/compute_hull.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scalelab/error.hpp"
#include "scalelab/flops.hpp"
#include "scalelab/regression.hpp"

namespace scalelab {

namespace {

struct LogPoint {
  double x;
  double y;
};

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

// Linear interpolation on a sorted polyline; NaN outside its x range.
double interpolate(std::span<const LogPoint> line, double x) {
  constexpr double kSlack = 1e-12;
  if (x < line.front().x - kSlack || x > line.back().x + kSlack) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  auto it = std::upper_bound(line.begin(), line.end(), x,
                             [](double v, const LogPoint& p) { return v < p.x; });
  if (it == line.begin()) return line.front().y;
  if (it == line.end()) return line.back().y;
  const LogPoint& hi = *it;
  const LogPoint& lo = *(it - 1);
  if (hi.x == lo.x) return std::min(lo.y, hi.y);
  const double t = (x - lo.x) / (hi.x - lo.x);
  return lo.y + t * (hi.y - lo.y);
}

std::vector<LogPoint> to_log_series(const std::vector<FlopsLoss>& points) {
  if (points.size() < 2) raise(ErrorCode::kEmptySeries, "every series needs at least 2 points", "series");
  std::vector<LogPoint> out;
  out.reserve(points.size());
  for (const FlopsLoss& p : points) {
    if (!(p.c > 0 && p.loss > 0) || !std::isfinite(p.c) || !std::isfinite(p.loss)) {
      raise(ErrorCode::kInvalidArgument, "C and L must be positive and finite", "series");
    }
    out.push_back({std::log(p.c), std::log(p.loss)});
  }
  std::sort(out.begin(), out.end(),
            [](const LogPoint& l, const LogPoint& r) { return l.x < r.x || (l.x == r.x && l.y < r.y); });
  return out;
}

std::vector<LogPoint> to_log_hull(std::span<const FlopsLoss> hull) {
  std::vector<LogPoint> out;
  out.reserve(hull.size());
  for (const FlopsLoss& p : hull) {
    if (!(p.c > 0 && p.loss > 0)) {
      raise(ErrorCode::kInvalidArgument, "hull points must be positive", "hull");
    }
    out.push_back({std::log(p.c), std::log(p.loss)});
  }
  std::sort(out.begin(), out.end(), [](const LogPoint& l, const LogPoint& r) { return l.x < r.x; });
  return out;
}

}  // namespace

std::vector<FlopsLoss> minimum_envelope(const SeriesMap& series, std::size_t grid_points) {
  if (series.empty()) raise(ErrorCode::kEmptySeries, "no series supplied", "series");
  if (grid_points < 2) raise(ErrorCode::kInvalidArgument, "envelope grid needs >= 2 points", "grid_points");
  std::vector<std::vector<LogPoint>> logs;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& [size, points] : series) {
    logs.push_back(to_log_series(points));
    lo = std::min(lo, logs.back().front().x);
    hi = std::max(hi, logs.back().back().x);
  }
  std::vector<FlopsLoss> envelope;
  envelope.reserve(grid_points);
  for (double x : log_grid(lo, hi, grid_points)) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& line : logs) {
      const double y = interpolate(line, x);
      if (!std::isnan(y)) best = std::min(best, y);
    }
    if (std::isfinite(best)) envelope.push_back({std::exp(x), std::exp(best)});
  }
  return envelope;
}

std::vector<FlopsLoss> frontier_points(const SeriesMap& series, std::size_t grid_points) {
  const std::vector<FlopsLoss> envelope = minimum_envelope(series, grid_points);
  // Monotone chain over log coordinates, keeping left turns only.
  std::vector<LogPoint> hull;
  for (const FlopsLoss& p : envelope) {
    const LogPoint q{std::log(p.c), std::log(p.loss)};
    while (hull.size() >= 2) {
      const LogPoint& o = hull[hull.size() - 2];
      const LogPoint& a = hull.back();
      const double lhs = (a.x - o.x) * (q.y - o.y);
      const double rhs = (a.y - o.y) * (q.x - o.x);
      // Collinear within rounding counts as a non-left turn.
      if (lhs - rhs <= 1e-12 * (std::abs(lhs) + std::abs(rhs))) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(q);
  }
  std::vector<FlopsLoss> out;
  out.reserve(hull.size());
  for (const LogPoint& p : hull) out.push_back({std::exp(p.x), std::exp(p.y)});
  return out;
}

PowerLawFit fit_compute_law(std::span<const FlopsLoss> hull, double c_min_flops,
                            std::size_t grid_points) {
  if (!(c_min_flops >= 0)) raise(ErrorCode::kInvalidArgument, "threshold must be >= 0", "min_flops");
  if (grid_points < 2) raise(ErrorCode::kInvalidArgument, "resampling needs >= 2 points", "grid_points");
  const std::vector<LogPoint> line = to_log_hull(hull);
  std::size_t above = 0;
  for (const LogPoint& p : line) above += std::exp(p.x) > c_min_flops ? 1 : 0;
  if (above < 2) {
    raise(ErrorCode::kTooFewPoints, "need at least 2 hull points above the FLOPs threshold", "hull");
  }
  const double top = line.back().x;
  const double bottom = c_min_flops > 0 ? std::max(std::log(c_min_flops), line.front().x) : line.front().x;
  // The first sample sits one step inside the threshold so every sample is
  // strictly above it.
  const double step = (top - bottom) / static_cast<double>(grid_points);
  std::vector<double> xs, ys;
  xs.reserve(grid_points);
  ys.reserve(grid_points);
  for (std::size_t i = 1; i <= grid_points; ++i) {
    const double x = i == grid_points ? top : bottom + step * static_cast<double>(i);
    xs.push_back(x);
    ys.push_back(interpolate(line, x));
  }
  const LinearFit lin = ordinary_least_squares(xs, ys);
  PowerLawFit law;
  law.k = std::exp(lin.intercept);
  law.p = lin.slope;
  law.x_min = std::exp(bottom);
  law.x_max = std::exp(top);
  law.r_squared = lin.r_squared;
  return law;
}

SeriesMap series_from_runs(std::span<const RunRecord> runs) {
  SeriesMap out;
  for (const RunRecord& r : runs) out[r.model_params()].push_back({run_flops(r), r.loss()});
  return out;
}

}  // namespace scalelab

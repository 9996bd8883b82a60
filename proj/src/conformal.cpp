#include "confglm/conformal.hpp"

#include <algorithm>
#include <cmath>

namespace confglm {

void ConformalConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must be in (0,1)");
  if (!(precision > 0.0))
    throw std::invalid_argument("precision must be positive");
  if (search && !(search->second > search->first))
    throw std::invalid_argument("search window must have positive length");
  if (!(refit_tol > 0.0) || refit_max_iter < 1)
    throw std::invalid_argument("invalid refit controls");
}

bool IntervalUnion::contains(double y) const {
  for (const auto& p : pieces)
    if (y >= p.lower && y <= p.upper) return true;
  return false;
}

double IntervalUnion::total_length() const {
  double s = 0.0;
  for (const auto& p : pieces) s += p.length();
  return s;
}

double adjusted_level(Eigen::Index n_local, double alpha) {
  if (n_local < 1) throw std::invalid_argument("n_local must be positive");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must be in (0,1)");
  double np1 = static_cast<double>(n_local + 1);
  return floor_guard(np1 * alpha) / np1;
}

double conformity_rank(const std::vector<double>& other_scores,
                       double candidate_score) {
  if (!std::isfinite(candidate_score))
    throw std::invalid_argument("non-finite conformity score");
  long count = 0;
  for (double s : other_scores) {
    if (!std::isfinite(s))
      throw std::invalid_argument("non-finite conformity score");
    if (s <= candidate_score) ++count;
  }
  return static_cast<double>(1 + count) /
         static_cast<double>(other_scores.size() + 1);
}

std::pair<double, double> search_window(const ConformalConfig& cfg,
                                        const Vector& y, bool positive) {
  if (cfg.search) return *cfg.search;
  if (y.size() == 0) throw std::invalid_argument("empty response");
  double lo = y.minCoeff(), hi = y.maxCoeff();
  double range = hi - lo;
  if (range <= 0.0) range = std::max(std::fabs(hi), 1.0);
  lo -= 0.5 * range;
  hi += 0.5 * range;
  if (positive) lo = std::max(lo, 1e-9);
  return {lo, hi};
}

namespace {

std::vector<double> build_grid(std::pair<double, double> window,
                               double precision) {
  auto [lo, hi] = window;
  auto count = static_cast<std::size_t>((hi - lo) / precision) + 1;
  std::vector<double> grid;
  grid.reserve(count + 1);
  for (std::size_t k = 0; k < count; ++k) grid.push_back(lo + k * precision);
  if (grid.back() < hi - 1e-12 * std::max(1.0, std::fabs(hi)))
    grid.push_back(hi);
  else
    grid.back() = hi;
  return grid;
}

bool safe_accept(const std::function<bool(double)>& accept, double y,
                 long& warnings) {
  try {
    return accept(y);
  } catch (const std::exception&) {
    ++warnings;
    return false;
  }
}

// Boundary between a rejected and an accepted point, bisected until the
// bracket is at most precision/2 wide; returns the bracket midpoint.
double refine_boundary(const std::function<bool(double)>& accept, double rej,
                       double acc, double precision, long& warnings) {
  while (std::fabs(acc - rej) > 0.5 * precision) {
    double mid = 0.5 * (acc + rej);
    if (mid == acc || mid == rej) break;
    if (safe_accept(accept, mid, warnings))
      acc = mid;
    else
      rej = mid;
  }
  return 0.5 * (acc + rej);
}

}  // namespace

std::vector<char> acceptance_flags_serial(
    const std::function<bool(double)>& accept, const std::vector<double>& grid,
    long& warnings) {
  std::vector<char> flags(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i)
    flags[i] = safe_accept(accept, grid[i], warnings) ? 1 : 0;
  return flags;
}

std::vector<char> acceptance_flags_parallel(
    const std::function<bool(double)>& accept, const std::vector<double>& grid,
    long& warnings) {
  std::vector<char> flags(grid.size(), 0);
  long warn_total = 0;
  const auto n = static_cast<std::int64_t>(grid.size());
#pragma omp parallel for schedule(static) reduction(+ : warn_total)
  for (std::int64_t i = 0; i < n; ++i) {
    long w = 0;
    flags[static_cast<std::size_t>(i)] =
        safe_accept(accept, grid[static_cast<std::size_t>(i)], w) ? 1 : 0;
    warn_total += w;
  }
  warnings += warn_total;
  return flags;
}

namespace {

std::vector<char> acceptance_flags_factory_parallel(
    const AcceptanceFactory& make_accept, const std::vector<double>& grid,
    long& warnings) {
  std::vector<char> flags(grid.size(), 0);
  long warn_total = 0;
  const auto n = static_cast<std::int64_t>(grid.size());
#pragma omp parallel reduction(+ : warn_total)
  {
    auto accept = make_accept();
    long w = 0;
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
      flags[static_cast<std::size_t>(i)] =
          safe_accept(accept, grid[static_cast<std::size_t>(i)], w) ? 1 : 0;
    warn_total += w;
  }
  warnings += warn_total;
  return flags;
}

}  // namespace

namespace {

IntervalUnion region_from_flags(const std::function<bool(double)>& accept,
                                const std::vector<double>& grid,
                                const std::vector<char>& flags,
                                const ConformalConfig& cfg, long& warnings) {
  IntervalUnion region;
  std::size_t i = 0;
  while (i < grid.size()) {
    if (!flags[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < grid.size() && flags[j + 1]) ++j;
    Interval piece;
    piece.lower = (i == 0) ? grid.front()
                           : refine_boundary(accept, grid[i - 1], grid[i],
                                             cfg.precision, warnings);
    piece.upper = (j + 1 == grid.size())
                      ? grid.back()
                      : refine_boundary(accept, grid[j + 1], grid[j],
                                        cfg.precision, warnings);
    if (piece.upper <= piece.lower) {
      piece.lower -= 1e-9;
      piece.upper += 1e-9;
    }
    region.pieces.push_back(piece);
    i = j + 1;
  }

  // Merge refined pieces whose separation collapsed to within one grid step.
  std::vector<Interval> merged;
  for (const auto& p : region.pieces) {
    if (!merged.empty() && p.lower - merged.back().upper <= cfg.precision)
      merged.back().upper = p.upper;
    else
      merged.push_back(p);
  }
  region.pieces = std::move(merged);
  return region;
}

}  // namespace

IntervalUnion region_from_acceptance(const std::function<bool(double)>& accept,
                                     const ConformalConfig& cfg,
                                     std::pair<double, double> window,
                                     RegionStats* stats, bool parallel_grid) {
  cfg.validate();
  if (!(window.second > window.first))
    throw std::invalid_argument("search window must have positive length");
  std::vector<double> grid = build_grid(window, cfg.precision);
  long warnings = 0;
  std::vector<char> flags =
      parallel_grid ? acceptance_flags_parallel(accept, grid, warnings)
                    : acceptance_flags_serial(accept, grid, warnings);
  IntervalUnion region = region_from_flags(accept, grid, flags, cfg, warnings);
  if (stats) stats->warnings += warnings;
  return region;
}

IntervalUnion region_from_acceptance(const AcceptanceFactory& make_accept,
                                     const ConformalConfig& cfg,
                                     std::pair<double, double> window,
                                     RegionStats* stats, bool parallel_grid) {
  cfg.validate();
  if (!(window.second > window.first))
    throw std::invalid_argument("search window must have positive length");
  std::vector<double> grid = build_grid(window, cfg.precision);
  long warnings = 0;
  std::vector<char> flags;
  if (parallel_grid) {
    flags = acceptance_flags_factory_parallel(make_accept, grid, warnings);
  } else {
    auto accept = make_accept();
    flags = acceptance_flags_serial(accept, grid, warnings);
  }
  auto refine_accept = make_accept();
  IntervalUnion region =
      region_from_flags(refine_accept, grid, flags, cfg, warnings);
  if (stats) stats->warnings += warnings;
  return region;
}

IntervalUnion region_from_acceptance(const std::function<bool(double)>& accept,
                                     const ConformalConfig& cfg,
                                     RegionStats* stats) {
  if (!cfg.search)
    throw std::invalid_argument(
        "region_from_acceptance needs an explicit search window");
  return region_from_acceptance(accept, cfg, *cfg.search, stats, false);
}

}  // namespace confglm

#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "confglm/common.hpp"

namespace confglm {

struct ConformalConfig {
  double alpha = 0.1;
  double precision = 0.005;
  // Search window for candidate responses; unset means the observed response
  // range expanded by 50% on each side (floored at 1e-9 for positive-support
  // families).
  std::optional<std::pair<double, double>> search;
  double refit_tol = 1e-8;
  int refit_max_iter = 25;

  void validate() const;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  double length() const { return upper - lower; }
};

// Sorted, pairwise-disjoint closed intervals.
struct IntervalUnion {
  std::vector<Interval> pieces;

  bool empty() const { return pieces.empty(); }
  bool contains(double y) const;
  double total_length() const;
};

// Warning counters accumulated while sweeping candidates; errors or
// non-convergent refits reject the candidate instead of propagating.
struct RegionStats {
  long warnings = 0;
};

// floor((n_local + 1) * alpha) / (n_local + 1)
double adjusted_level(Eigen::Index n_local, double alpha);

// (1 + #{s in other_scores : s <= candidate}) / (len(other_scores) + 1)
double conformity_rank(const std::vector<double>& other_scores,
                       double candidate_score);

std::pair<double, double> search_window(const ConformalConfig& cfg,
                                        const Vector& y, bool positive);

// Sweeps accept over the grid {lo, lo+precision, ..., hi}, bisects each run
// boundary down to half precision, and merges pieces separated by at most
// `precision`. accept must be callable from multiple threads when
// parallel_grid is set. Exceptions from accept reject the candidate and
// increment stats->warnings.
IntervalUnion region_from_acceptance(const std::function<bool(double)>& accept,
                                     const ConformalConfig& cfg,
                                     std::pair<double, double> window,
                                     RegionStats* stats = nullptr,
                                     bool parallel_grid = false);

// Variant for acceptance tests that keep per-call scratch: each worker thread
// builds its own predicate through the factory, so the closures may reuse
// internal buffers freely.
using AcceptanceFactory = std::function<std::function<bool(double)>()>;
IntervalUnion region_from_acceptance(const AcceptanceFactory& make_accept,
                                     const ConformalConfig& cfg,
                                     std::pair<double, double> window,
                                     RegionStats* stats = nullptr,
                                     bool parallel_grid = false);

// Uses cfg.search as the window (must be set).
IntervalUnion region_from_acceptance(const std::function<bool(double)>& accept,
                                     const ConformalConfig& cfg,
                                     RegionStats* stats = nullptr);

// Grid sweep helpers shared by the region builder and the benchmark; both
// produce identical flags, the parallel one via OpenMP.
std::vector<char> acceptance_flags_serial(
    const std::function<bool(double)>& accept, const std::vector<double>& grid,
    long& warnings);
std::vector<char> acceptance_flags_parallel(
    const std::function<bool(double)>& accept, const std::vector<double>& grid,
    long& warnings);

}  // namespace confglm

#pragma once

#include <string>
#include <vector>

#include "confglm/binning.hpp"
#include "confglm/common.hpp"
#include "confglm/conformal.hpp"

namespace confglm {

struct WarningCounters {
  long rejected_candidates = 0;  // refit failures treated as rejections
  long empty_regions = 0;        // excluded from the prediction-error mean

  long total() const { return rejected_candidates + empty_regions; }
};

struct DiagnosticsReport {
  std::string method;
  double marginal_coverage = 0.0;
  // Per partition bin / per fine slice; NaN marks cells with no points.
  std::vector<double> local_coverage;
  std::vector<double> conditional_coverage;
  double mean_area = 0.0;
  double prediction_error = 0.0;
  long n_points = 0;
  WarningCounters warnings;
};

// Mean squared distance from uncovered responses to the nearest boundary of
// their region. Points whose region is empty are dropped from numerator and
// denominator; `empty_count` (optional) receives how many.
double prediction_error(const std::vector<IntervalUnion>& regions,
                        const Vector& responses, long* empty_count = nullptr);

// Mean over points of total region length (an empty region contributes 0).
double mean_area(const std::vector<IntervalUnion>& regions);

// Closed-interval membership fractions overall, per partition bin, and per
// equal-width fine slice of each main effect (slices span the observed
// column range; layout is effect-major, d * fine_slices entries). Counts are
// kept alongside the fractions so callers can pool across datasets.
struct CoverageBreakdown {
  double marginal = 0.0;
  std::vector<double> local;
  std::vector<double> conditional;
  std::vector<long> local_count, local_covered;
  std::vector<long> cond_count, cond_covered;
  long covered = 0;
  long n_points = 0;
};

CoverageBreakdown coverage(const std::vector<IntervalUnion>& regions,
                           const Vector& responses, const Matrix& xs,
                           const BinPartition* partition = nullptr,
                           int fine_slices = 10);

// Assembles all metrics for one method on one dataset.
DiagnosticsReport evaluate_diagnostics(const std::string& method,
                                       const std::vector<IntervalUnion>& regions,
                                       const Vector& responses,
                                       const Matrix& xs,
                                       const BinPartition* partition = nullptr,
                                       int fine_slices = 10,
                                       long rejected_candidates = 0);

}  // namespace confglm

#pragma once

#include "confglm/binning.hpp"
#include "confglm/common.hpp"
#include "confglm/conformal.hpp"
#include "confglm/glm.hpp"

namespace confglm {

// Gaussian kernel throughout; bandwidth > 0 is used as given, otherwise
// Silverman's per-bin rule 1.06 * sd_k * n_k^(-1/5) applies (candidate
// excluded, so the bandwidth is fixed per bin and dataset).
struct KernelConfig {
  double bandwidth = 0.0;
};

// Binned nonparametric kernel conformal region. Acceptance of a candidate y
// compares the augmented density estimate at each in-bin response against its
// value at y and keeps y when at least a fraction alpha of the n_k + 1 values
// (candidate included) sit at or below it. The region depends on x only
// through its bin.
IntervalUnion kernel_conformal_region(const Dataset& data,
                                      const BinPartition& partition,
                                      const Vector& x_row,
                                      const ConformalConfig& cfg,
                                      const KernelConfig& kcfg = {},
                                      RegionStats* stats = nullptr);

// Absolute-residual conformal region from a least-squares mean fit, evaluated
// on `grid_points` equally spaced candidates over the auto search window and
// reported as runs of accepted cells (no bisection refinement; the grid
// resolution is the contract).
IntervalUnion ls_region(const Dataset& data, const ModelSpec& mean_spec,
                        const Vector& x_row, double alpha,
                        int grid_points = 100);

// As ls_region with residuals divided by a least-squares estimate of the
// conditional mean absolute deviation (same design, refit per candidate,
// floored at 1e-6).
IntervalUnion lslw_region(const Dataset& data, const ModelSpec& mean_spec,
                          const Vector& x_row, double alpha,
                          int grid_points = 100);

}  // namespace confglm

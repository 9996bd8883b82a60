#pragma once

#include <memory>

#include "confglm/binning.hpp"
#include "confglm/conformal.hpp"
#include "confglm/glm.hpp"

namespace confglm {

// Full-data MLE plus sufficient statistics for refitting with one extra
// observation (x, y). Gaussian refits are closed-form moment updates; gamma
// refits run Newton warm-started at the base fit. The most recent augmented
// fit is memoized by (x, y). Not thread-safe; use one instance per thread.
class AugmentedFitCache {
 public:
  AugmentedFitCache(const ModelSpec& spec, const Dataset& data,
                    const ConformalConfig& cfg = {});
  ~AugmentedFitCache();
  AugmentedFitCache(AugmentedFitCache&&) noexcept;
  AugmentedFitCache& operator=(AugmentedFitCache&&) noexcept;

  const FittedModel& base() const;
  const Design& design() const;

  // MLE over the training rows plus (x_row, y); the returned reference stays
  // valid until the next call on this object.
  const FittedModel& augmented(const Vector& x_row, double y);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Shortest interval holding 1 - alpha probability under the fitted
// per-observation density at x_row. Unimodal families only: gaussian is the
// central interval; gamma with shape <= 1 pins the lower end at 0.
Interval min_length_interval(const FittedModel& model, const Vector& x_row,
                             double alpha);

// Oracle highest-density region from the full-data fit (single interval).
IntervalUnion hd_region(const FittedModel& model, const Vector& x_row,
                        double alpha);

// Binned parametric conformal region: candidate (x, y) is accepted when the
// rank of its augmented-fit density among the in-bin training densities is
// at least the bin-adjusted level.
IntervalUnion binned_region(const Dataset& data, const ModelSpec& spec,
                            const BinPartition& partition, const Vector& x_row,
                            const ConformalConfig& cfg,
                            RegionStats* stats = nullptr);

// Transformation parametric conformal region: maps outcomes through the
// augmented conditional CDF, snaps the minimal-length interval to order
// statistics of the n+1 transformed values, and accepts candidates whose
// transform lands inside (closed comparison).
IntervalUnion transform_region(const Dataset& data, const ModelSpec& spec,
                               const Vector& x_row,
                               const ConformalConfig& cfg,
                               RegionStats* stats = nullptr);

}  // namespace confglm

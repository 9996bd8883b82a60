#pragma once

#include <vector>

#include "confglm/common.hpp"

namespace confglm {

// Axis-aligned equal-width partition of a rectangle. Cells are left-closed /
// right-open along each axis, with the final cell closed on the right.
struct BinPartition {
  Vector lo;
  Vector hi;
  std::vector<int> bins_per_axis;

  BinPartition() = default;
  // Uniform bin count per axis.
  BinPartition(const Vector& lo, const Vector& hi, int bins);
  BinPartition(const Vector& lo, const Vector& hi,
               std::vector<int> bins_per_axis);

  Eigen::Index d() const { return lo.size(); }
  int num_bins() const;

  void validate() const;
};

// Composite bin index, row-major over axes (first axis varies slowest).
int assign_bin(const BinPartition& partition, const Vector& x_row);

// Row index lists per bin; errors are left to the caller (empty bins allowed
// here, detected where they matter).
std::vector<std::vector<Eigen::Index>> bin_members(
    const BinPartition& partition, const Matrix& x);

// Bin-count rule used by the simulation study: 2 bins for n < 250, else 3.
int default_bin_count(Eigen::Index n);

}  // namespace confglm

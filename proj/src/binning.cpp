#include "confglm/binning.hpp"

#include <cmath>

namespace confglm {

BinPartition::BinPartition(const Vector& lo_, const Vector& hi_, int bins)
    : lo(lo_), hi(hi_),
      bins_per_axis(static_cast<std::size_t>(lo_.size()), bins) {
  validate();
}

BinPartition::BinPartition(const Vector& lo_, const Vector& hi_,
                           std::vector<int> bins_)
    : lo(lo_), hi(hi_), bins_per_axis(std::move(bins_)) {
  validate();
}

void BinPartition::validate() const {
  if (lo.size() != hi.size() ||
      static_cast<std::size_t>(lo.size()) != bins_per_axis.size())
    throw std::invalid_argument("partition dimensions disagree");
  if (lo.size() == 0) throw std::invalid_argument("partition needs d >= 1");
  for (Eigen::Index a = 0; a < lo.size(); ++a) {
    if (!(hi[a] > lo[a]))
      throw std::invalid_argument("partition axis has nonpositive width");
    if (bins_per_axis[static_cast<std::size_t>(a)] < 1)
      throw std::invalid_argument("each axis needs at least one bin");
  }
}

int BinPartition::num_bins() const {
  int total = 1;
  for (int b : bins_per_axis) total *= b;
  return total;
}

int assign_bin(const BinPartition& partition, const Vector& x_row) {
  partition.validate();
  if (x_row.size() != partition.d())
    throw std::invalid_argument("predictor dimension mismatch");
  int index = 0;
  for (Eigen::Index a = 0; a < partition.d(); ++a) {
    double v = x_row[a];
    double lo = partition.lo[a], hi = partition.hi[a];
    int bins = partition.bins_per_axis[static_cast<std::size_t>(a)];
    if (v < lo || v > hi)
      throw std::invalid_argument("predictor outside the partition rectangle");
    int cell = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
    if (cell >= bins) cell = bins - 1;  // closed final cell (v == hi)
    index = index * bins + cell;
  }
  return index;
}

std::vector<std::vector<Eigen::Index>> bin_members(
    const BinPartition& partition, const Matrix& x) {
  std::vector<std::vector<Eigen::Index>> members(
      static_cast<std::size_t>(partition.num_bins()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int b = assign_bin(partition, x.row(i).transpose());
    members[static_cast<std::size_t>(b)].push_back(i);
  }
  return members;
}

int default_bin_count(Eigen::Index n) { return n < 250 ? 2 : 3; }

}  // namespace confglm

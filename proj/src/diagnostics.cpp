#include "confglm/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace confglm {

namespace {

double distance_to_region(const IntervalUnion& region, double y) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& piece : region.pieces) {
    best = std::min(best, std::fabs(y - piece.lower));
    best = std::min(best, std::fabs(y - piece.upper));
  }
  return best;
}

void check_lengths(std::size_t regions, Eigen::Index responses) {
  if (regions != static_cast<std::size_t>(responses))
    throw std::invalid_argument("regions and responses differ in length");
}

}  // namespace

double prediction_error(const std::vector<IntervalUnion>& regions,
                        const Vector& responses, long* empty_count) {
  check_lengths(regions.size(), responses.size());
  long empties = 0;
  long used = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (regions[i].empty()) {
      ++empties;
      continue;
    }
    ++used;
    const double y = responses[static_cast<Eigen::Index>(i)];
    if (!regions[i].contains(y)) {
      double d = distance_to_region(regions[i], y);
      sum += d * d;
    }
  }
  if (empty_count) *empty_count = empties;
  return used > 0 ? sum / static_cast<double>(used) : 0.0;
}

double mean_area(const std::vector<IntervalUnion>& regions) {
  if (regions.empty()) throw std::invalid_argument("no regions given");
  double sum = 0.0;
  for (const auto& r : regions) sum += r.total_length();
  return sum / static_cast<double>(regions.size());
}

CoverageBreakdown coverage(const std::vector<IntervalUnion>& regions,
                           const Vector& responses, const Matrix& xs,
                           const BinPartition* partition, int fine_slices) {
  check_lengths(regions.size(), responses.size());
  if (xs.rows() != responses.size())
    throw std::invalid_argument("xs and responses differ in length");
  if (fine_slices < 1)
    throw std::invalid_argument("fine_slices must be positive");

  const auto n = responses.size();
  const auto d = xs.cols();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  CoverageBreakdown out;
  out.n_points = n;
  if (partition) {
    partition->validate();
    out.local_count.assign(partition->num_bins(), 0);
    out.local_covered.assign(partition->num_bins(), 0);
  }
  out.cond_count.assign(static_cast<std::size_t>(d) * fine_slices, 0);
  out.cond_covered.assign(static_cast<std::size_t>(d) * fine_slices, 0);

  Vector col_lo(d), col_hi(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    col_lo[j] = xs.col(j).minCoeff();
    col_hi[j] = xs.col(j).maxCoeff();
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    const bool in = regions[static_cast<std::size_t>(i)].contains(responses[i]);
    if (in) ++out.covered;
    if (partition) {
      int bin = assign_bin(*partition, xs.row(i).transpose());
      ++out.local_count[bin];
      if (in) ++out.local_covered[bin];
    }
    for (Eigen::Index j = 0; j < d; ++j) {
      int slice = 0;
      if (col_hi[j] > col_lo[j]) {
        double frac = (xs(i, j) - col_lo[j]) / (col_hi[j] - col_lo[j]);
        slice = std::min(fine_slices - 1,
                         std::max(0, static_cast<int>(frac * fine_slices)));
      }
      const std::size_t idx =
          static_cast<std::size_t>(j) * fine_slices + slice;
      ++out.cond_count[idx];
      if (in) ++out.cond_covered[idx];
    }
  }

  out.marginal = n > 0 ? static_cast<double>(out.covered) /
                             static_cast<double>(n)
                       : nan;
  out.local.resize(out.local_count.size());
  for (std::size_t k = 0; k < out.local_count.size(); ++k)
    out.local[k] = out.local_count[k] > 0
                       ? static_cast<double>(out.local_covered[k]) /
                             static_cast<double>(out.local_count[k])
                       : nan;
  out.conditional.resize(out.cond_count.size());
  for (std::size_t k = 0; k < out.cond_count.size(); ++k)
    out.conditional[k] = out.cond_count[k] > 0
                             ? static_cast<double>(out.cond_covered[k]) /
                                   static_cast<double>(out.cond_count[k])
                             : nan;
  return out;
}

DiagnosticsReport evaluate_diagnostics(
    const std::string& method, const std::vector<IntervalUnion>& regions,
    const Vector& responses, const Matrix& xs, const BinPartition* partition,
    int fine_slices, long rejected_candidates) {
  DiagnosticsReport report;
  report.method = method;
  auto cov = coverage(regions, responses, xs, partition, fine_slices);
  report.marginal_coverage = cov.marginal;
  report.local_coverage = std::move(cov.local);
  report.conditional_coverage = std::move(cov.conditional);
  report.mean_area = mean_area(regions);
  report.prediction_error =
      prediction_error(regions, responses, &report.warnings.empty_regions);
  report.n_points = responses.size();
  report.warnings.rejected_candidates = rejected_candidates;
  return report;
}

}  // namespace confglm

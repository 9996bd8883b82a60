// Brute-force reference implementations used only by the tests. Everything
// here recomputes from definitions with cold refits and sorting, on purpose:
// no incremental updates, no warm starts, no counting shortcuts.
#pragma once

#include <functional>
#include <vector>

#include "confglm/binning.hpp"
#include "confglm/common.hpp"
#include "confglm/conformal.hpp"
#include "confglm/glm.hpp"

namespace confglm::testing {

// Accepted runs of a fixed fine grid (no bisection, no gap merging).
std::vector<Interval> dense_region(const std::function<bool(double)>& accept,
                                   double lo, double hi, double step);

// Merge pieces separated by at most gap (mirrors the production contract so
// dense oracles can be compared piece by piece).
std::vector<Interval> merge_pieces(std::vector<Interval> pieces, double gap);

// True when both unions have the same piece count and all boundaries agree
// within tol.
bool regions_match(const IntervalUnion& region,
                   const std::vector<Interval>& oracle, double tol);

// Definitional acceptance tests with cold refits.
bool cold_accept_binned(const Dataset& data, const ModelSpec& spec,
                        const BinPartition& partition, const Vector& x_row,
                        double cand, double alpha);
bool cold_accept_transform(const Dataset& data, const ModelSpec& spec,
                           const Vector& x_row, double cand, double alpha);
bool cold_accept_kernel(const std::vector<double>& y_bin, double h,
                        double cand, double alpha);
bool cold_accept_ls(const Dataset& data, const ModelSpec& mean_spec,
                    const Vector& x_row, double cand, double alpha,
                    bool weighted);

// Shortest 1-alpha interval of Gamma(shape, rate), shape > 1, found by
// scanning density levels: each level's superlevel set is bracketed by
// bisection and its probability mass integrated by Simpson quadrature.
Interval gamma_shortest_interval_scan(double shape, double rate, double alpha);

double simpson(const std::function<double(double)>& f, double a, double b,
               int intervals);

// Two-sided Kolmogorov-Smirnov distance between a sample and a continuous
// CDF.
double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf);

}  // namespace confglm::testing

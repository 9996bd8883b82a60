#include "confglm/baselines.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "augmentors.hpp"
#include "confglm/special.hpp"

namespace confglm {

namespace {

double silverman_bandwidth(const std::vector<double>& yb) {
  const auto n = static_cast<double>(yb.size());
  double mean = 0.0;
  for (double v : yb) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : yb) ss += (v - mean) * (v - mean);
  double sd = yb.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return 1.06 * sd * std::pow(n, -0.2);
}

// Accepted grid cells merged into pieces; a run of one cell is widened to a
// representable interval.
IntervalUnion region_from_grid_runs(const std::vector<double>& grid,
                                    const std::vector<char>& flags) {
  IntervalUnion region;
  const auto g = grid.size();
  for (std::size_t i = 0; i < g;) {
    if (!flags[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < g && flags[j + 1]) ++j;
    double lo = grid[i], hi = grid[j];
    if (i == j) {
      lo -= 1e-9;
      hi += 1e-9;
    }
    region.pieces.push_back({lo, hi});
    i = j + 1;
  }
  return region;
}

struct LeastSquaresSetup {
  Design design;
  detail::GaussianAugmentor aug;
  std::vector<double> grid;
  long rank_limit = 0;
};

LeastSquaresSetup prepare_least_squares(const Dataset& data,
                                        const ModelSpec& mean_spec,
                                        const Vector& x_row, double alpha,
                                        int grid_points) {
  mean_spec.validate();
  if (mean_spec.family != Family::gaussian ||
      mean_spec.link != Link::identity)
    throw std::invalid_argument(
        "residual conformal baselines require a gaussian identity mean model");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must be in (0,1)");
  if (grid_points < 2)
    throw std::invalid_argument("grid_points must be at least 2");

  LeastSquaresSetup s;
  s.design = expand_design(data.x, mean_spec.degree);
  if (data.n() < s.design.m() + 2)
    throw std::invalid_argument("need at least " +
                                std::to_string(s.design.m() + 2) +
                                " rows to fit " +
                                std::to_string(s.design.m()) +
                                " coefficients");
  s.aug.init(s.design, data.y);
  s.aug.set_query(expand_row(x_row, mean_spec.degree));

  ConformalConfig window_cfg;
  window_cfg.alpha = alpha;
  auto [lo, hi] = search_window(window_cfg, data.y, false);
  s.grid.resize(grid_points);
  const double step = (hi - lo) / static_cast<double>(grid_points - 1);
  for (int i = 0; i < grid_points; ++i)
    s.grid[i] = lo + step * static_cast<double>(i);
  s.grid.back() = hi;

  s.rank_limit = static_cast<long>(
      ceil_guard((1.0 - alpha) * static_cast<double>(data.n() + 1)));
  return s;
}

}  // namespace

IntervalUnion kernel_conformal_region(const Dataset& data,
                                      const BinPartition& partition,
                                      const Vector& x_row,
                                      const ConformalConfig& cfg,
                                      const KernelConfig& kcfg,
                                      RegionStats* stats) {
  cfg.validate();
  if (!std::isfinite(kcfg.bandwidth) || kcfg.bandwidth < 0.0)
    throw std::invalid_argument("kernel bandwidth must be positive");

  const int bin = assign_bin(partition, x_row);
  std::vector<double> yb;
  for (Eigen::Index i = 0; i < data.n(); ++i)
    if (assign_bin(partition, data.x.row(i).transpose()) == bin)
      yb.push_back(data.y[i]);
  if (yb.empty())
    throw NumericError("bin " + std::to_string(bin) + " has no training rows");

  const auto n_k = yb.size();
  double h = kcfg.bandwidth > 0.0 ? kcfg.bandwidth : silverman_bandwidth(yb);
  if (!(h > 0.0)) {
    double scale = 1.0;
    for (double v : yb) scale = std::max(scale, std::fabs(v));
    h = 1e-12 * scale;
  }

  // Shared positive factors cancel from the density comparison, so scores
  // reduce to kernel sums: each in-bin point carries its own base KDE mass
  // plus the candidate's kernel, the candidate carries the sum over the bin
  // plus K(0).
  std::vector<double> base(n_k, 0.0);
  for (std::size_t i = 0; i < n_k; ++i)
    for (std::size_t j = 0; j < n_k; ++j)
      base[i] += normal_pdf((yb[i] - yb[j]) / h);

  const long required = static_cast<long>(
      ceil_guard(cfg.alpha * static_cast<double>(n_k + 1)));
  const double k0 = normal_pdf(0.0);

  auto accept = [&yb, &base, h, k0, required](double cand) {
    double score_cand = k0;
    for (double v : yb) score_cand += normal_pdf((v - cand) / h);
    long cnt = 1;
    for (std::size_t i = 0; i < yb.size(); ++i) {
      double score_i = base[i] + normal_pdf((yb[i] - cand) / h);
      if (score_i <= score_cand) ++cnt;
    }
    return cnt >= required;
  };

  const auto window = search_window(cfg, data.y, false);
  return region_from_acceptance(accept, cfg, window, stats, false);
}

IntervalUnion ls_region(const Dataset& data, const ModelSpec& mean_spec,
                        const Vector& x_row, double alpha, int grid_points) {
  auto s = prepare_least_squares(data, mean_spec, x_row, alpha, grid_points);
  const auto n = data.n();

  std::vector<char> flags(s.grid.size(), 0);
  for (std::size_t g = 0; g < s.grid.size(); ++g) {
    const double cand = s.grid[g];
    const double rc = std::fabs(s.aug.resid_cand(cand));
    long cnt = 1;
    for (Eigen::Index i = 0; i < n; ++i)
      if (std::fabs(s.aug.resid(i, cand)) <= rc) ++cnt;
    flags[g] = cnt <= s.rank_limit;
  }
  return region_from_grid_runs(s.grid, flags);
}

IntervalUnion lslw_region(const Dataset& data, const ModelSpec& mean_spec,
                          const Vector& x_row, double alpha, int grid_points) {
  auto s = prepare_least_squares(data, mean_spec, x_row, alpha, grid_points);
  const auto n = data.n();
  constexpr double kRhoFloor = 1e-6;

  Vector abs_r(n);
  std::vector<char> flags(s.grid.size(), 0);
  for (std::size_t g = 0; g < s.grid.size(); ++g) {
    const double cand = s.grid[g];
    for (Eigen::Index i = 0; i < n; ++i)
      abs_r[i] = std::fabs(s.aug.resid(i, cand));
    const double abs_c = std::fabs(s.aug.resid_cand(cand));

    // Dispersion fit of the absolute residuals on the augmented design; the
    // normal-equations factor from the mean fit is reused.
    Vector rhs = s.design.features.transpose() * abs_r + s.aug.f * abs_c;
    Vector gamma = s.aug.ldlt.solve(rhs);
    Vector rho = s.design.features * gamma;
    const double rho_c = std::max(s.aug.f.dot(gamma), kRhoFloor);

    const double wc = abs_c / rho_c;
    long cnt = 1;
    for (Eigen::Index i = 0; i < n; ++i)
      if (abs_r[i] / std::max(rho[i], kRhoFloor) <= wc) ++cnt;
    flags[g] = cnt <= s.rank_limit;
  }
  return region_from_grid_runs(s.grid, flags);
}

}  // namespace confglm

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "confglm/parametric.hpp"
#include "confglm/special.hpp"

namespace confglm::testing {

std::vector<Interval> dense_region(const std::function<bool(double)>& accept,
                                   double lo, double hi, double step) {
  std::vector<Interval> pieces;
  bool open = false;
  double start = 0.0, last = 0.0;
  for (double y = lo; y <= hi + 0.5 * step; y += step) {
    if (accept(y)) {
      if (!open) {
        open = true;
        start = y;
      }
      last = y;
    } else if (open) {
      pieces.push_back({start, last});
      open = false;
    }
  }
  if (open) pieces.push_back({start, last});
  return pieces;
}

std::vector<Interval> merge_pieces(std::vector<Interval> pieces, double gap) {
  std::vector<Interval> out;
  for (const auto& p : pieces) {
    if (!out.empty() && p.lower - out.back().upper <= gap)
      out.back().upper = p.upper;
    else
      out.push_back(p);
  }
  return out;
}

bool regions_match(const IntervalUnion& region,
                   const std::vector<Interval>& oracle, double tol) {
  if (region.pieces.size() != oracle.size()) return false;
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    if (std::fabs(region.pieces[i].lower - oracle[i].lower) > tol)
      return false;
    if (std::fabs(region.pieces[i].upper - oracle[i].upper) > tol)
      return false;
  }
  return true;
}

namespace {

FittedModel cold_augmented_fit(const Dataset& data, const ModelSpec& spec,
                               const Vector& x_row, double cand) {
  Matrix x_aug(data.n() + 1, data.d());
  x_aug.topRows(data.n()) = data.x;
  x_aug.row(data.n()) = x_row.transpose();
  Vector y_aug(data.n() + 1);
  y_aug.head(data.n()) = data.y;
  y_aug[data.n()] = cand;
  return fit_mle(spec, expand_design(x_aug, spec.degree), y_aug);
}

}  // namespace

bool cold_accept_binned(const Dataset& data, const ModelSpec& spec,
                        const BinPartition& partition, const Vector& x_row,
                        double cand, double alpha) {
  const FittedModel fit = cold_augmented_fit(data, spec, x_row, cand);
  const int bin = assign_bin(partition, x_row);

  std::vector<double> scores;
  for (Eigen::Index i = 0; i < data.n(); ++i)
    if (assign_bin(partition, data.x.row(i).transpose()) == bin)
      scores.push_back(log_density(fit, data.x.row(i).transpose(), data.y[i]));
  const double cand_score = log_density(fit, x_row, cand);

  const auto n_k = static_cast<Eigen::Index>(scores.size());
  return conformity_rank(scores, cand_score) >=
         adjusted_level(n_k, alpha) - 1e-12;
}

bool cold_accept_transform(const Dataset& data, const ModelSpec& spec,
                           const Vector& x_row, double cand, double alpha) {
  const FittedModel fit = cold_augmented_fit(data, spec, x_row, cand);
  const auto n = data.n();

  std::vector<double> u(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    u[i] = cdf(fit, data.x.row(i).transpose(), data.y[i]);
  const double u_cand = cdf(fit, x_row, cand);

  const Interval hd = min_length_interval(fit, x_row, alpha);
  const double u_lwr = cdf(fit, x_row, hd.lower);
  const double u_upr = cdf(fit, x_row, hd.upper);

  // Snapping indices address order statistics of the n training values.
  std::sort(u.begin(), u.end());
  const double np1 = static_cast<double>(n + 1);
  const long j_lo = static_cast<long>(std::floor(np1 * u_lwr + 1e-9));
  const long j_hi = std::min<long>(
      static_cast<long>(std::ceil(np1 * u_upr - 1e-9)), static_cast<long>(n));
  const double lower = j_lo >= 1 ? u[j_lo - 1] : 0.0;
  const double upper = u[j_hi - 1];
  return u_cand >= lower && u_cand <= upper;
}

bool cold_accept_kernel(const std::vector<double>& y_bin, double h,
                        double cand, double alpha) {
  const auto n_k = static_cast<double>(y_bin.size());
  auto kde = [&](double v) {
    double s = 0.0;
    for (double yj : y_bin) s += normal_pdf((v - yj) / h);
    return s / (n_k * h);
  };
  auto augmented = [&](double v) {
    return n_k / (n_k + 1.0) * kde(v) +
           normal_pdf((v - cand) / h) / ((n_k + 1.0) * h);
  };
  const double cand_val = augmented(cand);
  long at_or_below = 1;
  for (double yi : y_bin)
    if (augmented(yi) <= cand_val) ++at_or_below;
  return static_cast<double>(at_or_below) / (n_k + 1.0) >= alpha - 1e-12;
}

bool cold_accept_ls(const Dataset& data, const ModelSpec& mean_spec,
                    const Vector& x_row, double cand, double alpha,
                    bool weighted) {
  const auto n = data.n();
  Matrix x_aug(n + 1, data.d());
  x_aug.topRows(n) = data.x;
  x_aug.row(n) = x_row.transpose();
  Vector y_aug(n + 1);
  y_aug.head(n) = data.y;
  y_aug[n] = cand;

  const Design design = expand_design(x_aug, mean_spec.degree);
  const Vector beta =
      design.features.householderQr().solve(y_aug);
  Vector abs_r = (y_aug - design.features * beta).cwiseAbs();

  Vector w = abs_r;
  if (weighted) {
    const Vector gamma = design.features.householderQr().solve(abs_r);
    const Vector rho = (design.features * gamma).cwiseMax(1e-6);
    w = abs_r.cwiseQuotient(rho);
  }

  long rank = 0;
  for (Eigen::Index i = 0; i <= n; ++i)
    if (w[i] <= w[n]) ++rank;
  const long limit = static_cast<long>(
      std::ceil((1.0 - alpha) * static_cast<double>(n + 1) - 1e-9));
  return rank <= limit;
}

Interval gamma_shortest_interval_scan(double shape, double rate,
                                      double alpha) {
  if (shape <= 1.0)
    throw std::invalid_argument("scan oracle needs shape > 1");
  auto pdf = [&](double y) { return std::exp(gamma_log_pdf(shape, rate, y)); };
  const double mode = (shape - 1.0) / rate;
  const double fmode = pdf(mode);

  auto endpoints = [&](double level) {
    double alo = 0.0, ahi = mode;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (alo + ahi);
      (pdf(mid) < level ? alo : ahi) = mid;
    }
    double blo = mode, bhi = mode;
    double span = std::max(1.0 / rate, mode);
    while (pdf(bhi) >= level) bhi += span;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (blo + bhi);
      (pdf(mid) >= level ? blo : bhi) = mid;
    }
    return Interval{0.5 * (alo + ahi), 0.5 * (blo + bhi)};
  };

  double clo = fmode * 1e-12, chi = fmode * (1.0 - 1e-12);
  Interval best{};
  for (int it = 0; it < 80; ++it) {
    const double c = 0.5 * (clo + chi);
    best = endpoints(c);
    const double mass = simpson(pdf, best.lower, best.upper, 20000);
    (mass > 1.0 - alpha ? clo : chi) = c;
  }
  return best;
}

double simpson(const std::function<double(double)>& f, double a, double b,
               int intervals) {
  if (intervals % 2) ++intervals;
  const double h = (b - a) / intervals;
  double sum = f(a) + f(b);
  for (int i = 1; i < intervals; ++i)
    sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

double ks_statistic(std::vector<double> sample,
                    const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i + 1) / n));
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace confglm::testing

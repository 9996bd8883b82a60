#include "confglm/parametric.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "augmentors.hpp"
#include "confglm/special.hpp"

namespace confglm {

using detail::GaussianAugmentor;

namespace {

// ----- minimal-length interval -----

// For gamma shapes > 1 the optimal interval (a, b) = (Q(u), Q(u + 1 - alpha))
// has equal density at both ends; u* is the root of
// g(u) = f(Q(u)) - f(Q(u + 1 - alpha)), increasing in u. The problem is
// scale-free, so it is solved at rate 1. `hint` warm-starts the Newton
// iteration (pass a negative value for a cold solve).
double gamma_ustar(double nu, double alpha, double hint) {
  const double mode = nu - 1.0;
  const double fmode = std::exp(gamma_log_pdf(nu, 1.0, mode));
  const double tol = 1e-9 * fmode;
  double ulo = 1e-13, uhi = alpha * (1.0 - 1e-12);

  auto g = [&](double u, double& gprime) {
    double a = gamma_quantile(nu, 1.0, u);
    double b = gamma_quantile(nu, 1.0, u + 1.0 - alpha);
    gprime = (nu - 1.0) * (1.0 / a - 1.0 / b);
    return std::exp(gamma_log_pdf(nu, 1.0, a)) -
           std::exp(gamma_log_pdf(nu, 1.0, b));
  };

  double gp;
  if (g(ulo, gp) >= 0.0) return ulo;  // near-monotone density
  if (g(uhi, gp) <= 0.0)
    throw NumericError("min_length_interval: bracketing failed at shape " +
                       std::to_string(nu));

  double u = (hint > ulo && hint < uhi) ? hint : 0.5 * alpha;
  for (int iter = 0; iter < 80; ++iter) {
    double gu = g(u, gp);
    if (std::fabs(gu) <= tol) return u;
    if (gu < 0.0)
      ulo = u;
    else
      uhi = u;
    double next = (gp > 0.0) ? u - gu / gp : 0.5 * (ulo + uhi);
    if (!(next > ulo && next < uhi)) next = 0.5 * (ulo + uhi);
    if (uhi - ulo < 1e-15) return 0.5 * (ulo + uhi);
    u = next;
  }
  throw NumericError("min_length_interval: Newton iteration did not converge");
}

// ----- gamma augmented refits -----

struct GammaAugmentor {
  ModelSpec spec;
  Design aug_design;
  Vector aug_y;
  FittedModel base;
  FitOptions opts;
  Eigen::Index n = 0;

  void init(const ModelSpec& s, const Design& dsn, const Vector& response,
            const ConformalConfig& cfg) {
    spec = s;
    n = dsn.n();
    aug_design.degree = dsn.degree;
    aug_design.d = dsn.d;
    aug_design.features.resize(n + 1, dsn.m());
    aug_design.features.topRows(n) = dsn.features;
    aug_y.resize(n + 1);
    aug_y.head(n) = response;
    base = fit_mle(s, dsn, response);
    opts.tol_scale = cfg.refit_tol;
    opts.max_iter = cfg.refit_max_iter;
    opts.warm_start = &base;
  }

  void set_query(const Vector& features) {
    aug_design.features.row(n) = features.transpose();
  }

  FittedModel fit(double cand) {
    aug_y[n] = cand;
    FittedModel out = fit_mle(spec, aug_design, aug_y, opts);
    if (!out.converged)
      throw NumericError("augmented refit did not converge");
    return out;
  }
};

double inverse_link_mean(Link link, double eta) {
  switch (link) {
    case Link::identity:
      return eta;
    case Link::inverse:
      if (eta <= 0.0)
        throw NumericError("linear predictor not positive under inverse link");
      return 1.0 / eta;
    case Link::log:
      return std::exp(eta);
  }
  return eta;
}

// Required count so that (1 + count)/(n_local + 1) >= adjusted level, as an
// exact integer comparison.
long rank_threshold(Eigen::Index n_local, double alpha) {
  return static_cast<long>(
      floor_guard(static_cast<double>(n_local + 1) * alpha));
}

}  // namespace

// ----- AugmentedFitCache -----

struct AugmentedFitCache::Impl {
  ModelSpec spec;
  Design design;
  Vector y;
  ConformalConfig cfg;
  FittedModel base;

  GaussianAugmentor gauss;
  GammaAugmentor gamma;

  bool has_memo = false;
  Vector memo_x;
  double memo_y = 0.0;
  FittedModel memo_fit;
  Vector last_query;  // gaussian: query features already factored
  bool has_query = false;
};

AugmentedFitCache::AugmentedFitCache(const ModelSpec& spec, const Dataset& data,
                                     const ConformalConfig& cfg)
    : impl_(std::make_unique<Impl>()) {
  spec.validate();
  impl_->spec = spec;
  impl_->design = expand_design(data.x, spec.degree);
  impl_->y = data.y;
  impl_->cfg = cfg;
  if (spec.family == Family::gaussian) {
    impl_->base = fit_mle(spec, impl_->design, impl_->y);
    impl_->gauss.init(impl_->design, impl_->y);
  } else {
    impl_->gamma.init(spec, impl_->design, impl_->y, cfg);
    impl_->base = impl_->gamma.base;
  }
}

AugmentedFitCache::~AugmentedFitCache() = default;
AugmentedFitCache::AugmentedFitCache(AugmentedFitCache&&) noexcept = default;
AugmentedFitCache& AugmentedFitCache::operator=(AugmentedFitCache&&) noexcept =
    default;

const FittedModel& AugmentedFitCache::base() const { return impl_->base; }
const Design& AugmentedFitCache::design() const { return impl_->design; }

const FittedModel& AugmentedFitCache::augmented(const Vector& x_row,
                                                double y) {
  if (impl_->has_memo && y == impl_->memo_y && x_row == impl_->memo_x)
    return impl_->memo_fit;
  Vector f = expand_row(x_row, impl_->spec.degree);
  if (impl_->spec.family == Family::gaussian) {
    if (!impl_->has_query || f != impl_->last_query) {
      impl_->gauss.set_query(f);
      impl_->last_query = f;
      impl_->has_query = true;
    }
    const auto& g = impl_->gauss;
    FittedModel fit;
    fit.spec = impl_->spec;
    fit.beta = g.c0 + y * g.c1;
    fit.dispersion = g.sigma2(y);
    if (!(fit.dispersion > 0.0))
      throw NumericError("degenerate fit: zero residual variance");
    fit.log_likelihood =
        -0.5 * static_cast<double>(g.n + 1) *
        (std::log(2.0 * M_PI * fit.dispersion) + 1.0);
    fit.iterations = 1;
    fit.converged = true;
    impl_->memo_fit = std::move(fit);
  } else {
    impl_->gamma.set_query(f);
    impl_->memo_fit = impl_->gamma.fit(y);
  }
  impl_->has_memo = true;
  impl_->memo_x = x_row;
  impl_->memo_y = y;
  return impl_->memo_fit;
}

// ----- minimal-length interval and oracle HD region -----

Interval min_length_interval(const FittedModel& model, const Vector& x_row,
                             double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must be in (0,1)");
  double mu = mean_response(model, x_row);
  if (model.spec.family == Family::gaussian) {
    double half = normal_quantile(1.0 - 0.5 * alpha) *
                  std::sqrt(model.dispersion);
    return {mu - half, mu + half};
  }
  double nu = model.dispersion;
  double rate = nu / mu;
  if (nu <= 1.0) return {0.0, gamma_quantile(nu, rate, 1.0 - alpha)};
  double ustar = gamma_ustar(nu, alpha, -1.0);
  return {gamma_quantile(nu, rate, ustar),
          gamma_quantile(nu, rate, ustar + 1.0 - alpha)};
}

IntervalUnion hd_region(const FittedModel& model, const Vector& x_row,
                        double alpha) {
  IntervalUnion out;
  out.pieces.push_back(min_length_interval(model, x_row, alpha));
  return out;
}

// ----- binned parametric conformal region -----

IntervalUnion binned_region(const Dataset& data, const ModelSpec& spec,
                            const BinPartition& partition, const Vector& x_row,
                            const ConformalConfig& cfg, RegionStats* stats) {
  spec.validate();
  cfg.validate();
  const Design design = expand_design(data.x, spec.degree);
  const int bin = assign_bin(partition, x_row);
  std::vector<Eigen::Index> members;
  for (Eigen::Index i = 0; i < data.n(); ++i)
    if (assign_bin(partition, data.x.row(i).transpose()) == bin)
      members.push_back(i);
  if (members.empty())
    throw NumericError("bin " + std::to_string(bin) + " has no training rows");

  const auto n_k = static_cast<Eigen::Index>(members.size());
  const long required = rank_threshold(n_k, cfg.alpha);
  const auto window =
      search_window(cfg, data.y, positive_support(spec.family));
  const Vector f = expand_row(x_row, spec.degree);

  if (spec.family == Family::gaussian) {
    GaussianAugmentor aug;
    aug.init(design, data.y);
    aug.set_query(f);
    auto accept = [&, members, required](double cand) {
      double rc = aug.resid_cand(cand);
      double rc2 = rc * rc;
      long cnt = 0;
      for (Eigen::Index i : members) {
        double r = aug.resid(i, cand);
        if (r * r >= rc2) ++cnt;
      }
      return 1 + cnt >= required;
    };
    return region_from_acceptance(accept, cfg, window, stats, false);
  }

  GammaAugmentor proto;
  proto.init(spec, design, data.y, cfg);
  proto.set_query(f);
  std::vector<double> log_y_bin;
  for (Eigen::Index i : members) log_y_bin.push_back(std::log(data.y[i]));

  AcceptanceFactory factory = [&]() {
    auto aug = std::make_shared<GammaAugmentor>(proto);
    aug->opts.warm_start = &aug->base;
    return std::function<bool(double)>(
        [aug, &data, &members, &log_y_bin, required,
         link = spec.link](double cand) {
          FittedModel fit = aug->fit(cand);
          const double nu = fit.dispersion;
          Vector eta = aug->aug_design.features * fit.beta;
          double mu_c = inverse_link_mean(link, eta[aug->n]);
          double s_c = -nu * std::log(mu_c) + (nu - 1.0) * std::log(cand) -
                       nu * cand / mu_c;
          long cnt = 0;
          for (std::size_t idx = 0; idx < members.size(); ++idx) {
            Eigen::Index i = members[idx];
            double mu_i = inverse_link_mean(link, eta[i]);
            double s_i = -nu * std::log(mu_i) +
                         (nu - 1.0) * log_y_bin[idx] - nu * data.y[i] / mu_i;
            if (s_i <= s_c) ++cnt;
          }
          return 1 + cnt >= required;
        });
  };
  return region_from_acceptance(factory, cfg, window, stats, false);
}

// ----- transformation parametric conformal region -----

IntervalUnion transform_region(const Dataset& data, const ModelSpec& spec,
                               const Vector& x_row, const ConformalConfig& cfg,
                               RegionStats* stats) {
  spec.validate();
  cfg.validate();
  const Design design = expand_design(data.x, spec.degree);
  const auto n = data.n();
  const auto window =
      search_window(cfg, data.y, positive_support(spec.family));
  const Vector f = expand_row(x_row, spec.degree);
  const double np1 = static_cast<double>(n + 1);

  if (spec.family == Family::gaussian) {
    GaussianAugmentor aug;
    aug.init(design, data.y);
    aug.set_query(f);
    // The minimal-length interval of a gaussian is central, so the
    // transformed bounds are alpha/2 and 1 - alpha/2 for every candidate and
    // the snapping indices are fixed.
    const long j_lo = static_cast<long>(floor_guard(np1 * 0.5 * cfg.alpha));
    const long j_hi = std::min<long>(
        static_cast<long>(ceil_guard(np1 * (1.0 - 0.5 * cfg.alpha))),
        static_cast<long>(n));
    auto accept = [&aug, n, j_lo, j_hi](double cand) {
      // Ranks of the transformed values equal ranks of raw residuals.
      double rc = aug.resid_cand(cand);
      long c_le = 0, c_lt = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        double r = aug.resid(i, cand);
        if (r <= rc) ++c_le;
        if (r < rc) ++c_lt;
      }
      // Snapped bounds are order statistics of the n training values:
      // candidate >= U_(j_lo) and candidate <= U_(j_hi), both closed.
      bool lower_ok = (j_lo < 1) || (c_le >= j_lo);
      bool upper_ok = (c_lt + 1 <= j_hi);
      return lower_ok && upper_ok;
    };
    return region_from_acceptance(accept, cfg, window, stats, false);
  }

  GammaAugmentor proto;
  proto.init(spec, design, data.y, cfg);
  proto.set_query(f);

  AcceptanceFactory factory = [&]() {
    auto aug = std::make_shared<GammaAugmentor>(proto);
    aug->opts.warm_start = &aug->base;
    auto hint = std::make_shared<double>(-1.0);
    return std::function<bool(double)>([aug, hint, &data, n, np1,
                                        alpha = cfg.alpha,
                                        link = spec.link](double cand) {
      FittedModel fit = aug->fit(cand);
      const double nu = fit.dispersion;
      Vector eta = aug->aug_design.features * fit.beta;
      double mu_c = inverse_link_mean(link, eta[n]);
      double u_lwr, u_upr;
      if (nu <= 1.0) {
        u_lwr = 0.0;
        u_upr = 1.0 - alpha;
      } else {
        double ustar = gamma_ustar(nu, alpha, *hint);
        *hint = ustar;
        u_lwr = ustar;
        u_upr = ustar + 1.0 - alpha;
      }
      const long j_lo = static_cast<long>(floor_guard(np1 * u_lwr));
      const long j_hi = std::min<long>(
          static_cast<long>(ceil_guard(np1 * u_upr)), static_cast<long>(n));
      double u_c = gamma_cdf(nu, nu / mu_c, cand);
      long c_le = 0, c_lt = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        double mu_i = inverse_link_mean(link, eta[i]);
        double u_i = gamma_cdf(nu, nu / mu_i, data.y[i]);
        if (u_i <= u_c) ++c_le;
        if (u_i < u_c) ++c_lt;
      }
      bool lower_ok = (j_lo < 1) || (c_le >= j_lo);
      bool upper_ok = (c_lt + 1 <= j_hi);
      return lower_ok && upper_ok;
    });
  };
  return region_from_acceptance(factory, cfg, window, stats, false);
}

}  // namespace confglm

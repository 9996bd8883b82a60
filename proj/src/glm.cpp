#include "confglm/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "confglm/special.hpp"

namespace confglm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNuMin = 1e-3;
constexpr double kNuMax = 100.0;

double link_eval(Link link, double mu);

// Linear predictors for the whole design.
Vector linear_predictor(const Design& design, const Vector& beta) {
  return design.features * beta;
}

bool eta_feasible(Link link, const Vector& eta) {
  if (link != Link::inverse) return true;
  return (eta.array() > 0.0).all();
}

// Gamma log likelihood at (beta, nu); -inf when infeasible.
double gamma_loglik(Link link, const Design& design, const Vector& y,
                    const Vector& eta, double nu, double sum_log_y) {
  const auto n = static_cast<double>(design.n());
  if (!eta_feasible(link, eta)) return -kInf;
  double sum_log_mu = 0.0, sum_ratio = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (link == Link::inverse) {
      sum_log_mu -= std::log(eta[i]);
      sum_ratio += y[i] * eta[i];
    } else {
      sum_log_mu += eta[i];
      sum_ratio += y[i] * std::exp(-eta[i]);
    }
  }
  return n * (nu * std::log(nu) - std::lgamma(nu)) + (nu - 1.0) * sum_log_y -
         nu * sum_log_mu - nu * sum_ratio;
}

// Score in (beta, log nu); beta block scaled by nu as derived from the
// likelihood, u-component is nu * dl/dnu.
void gamma_score(Link link, const Design& design, const Vector& y,
                 const Vector& eta, double nu, double sum_log_y,
                 Vector& out) {
  const auto n = static_cast<double>(design.n());
  const auto m = design.m();
  out.setZero(m + 1);
  double s_nu = n * (std::log(nu) + 1.0 - digamma(nu)) + sum_log_y;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double coef, log_mu, ratio;
    if (link == Link::inverse) {
      coef = 1.0 / eta[i] - y[i];
      log_mu = -std::log(eta[i]);
      ratio = y[i] * eta[i];
    } else {
      coef = y[i] * std::exp(-eta[i]) - 1.0;
      log_mu = eta[i];
      ratio = y[i] * std::exp(-eta[i]);
    }
    out.head(m) += coef * design.features.row(i).transpose();
    s_nu += -log_mu - ratio;
  }
  out.head(m) *= nu;
  out[m] = nu * s_nu;
}

void gamma_hessian(Link link, const Design& design, const Vector& y,
                   const Vector& eta, double nu, const Vector& score_vec,
                   Matrix& out) {
  const auto n = static_cast<double>(design.n());
  const auto m = design.m();
  out.setZero(m + 1, m + 1);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double w = (link == Link::inverse) ? 1.0 / (eta[i] * eta[i])
                                       : y[i] * std::exp(-eta[i]);
    out.topLeftCorner(m, m) -=
        (nu * w) * (design.features.row(i).transpose() *
                    design.features.row(i));
  }
  out.block(0, m, m, 1) = score_vec.head(m);
  out.block(m, 0, 1, m) = score_vec.head(m).transpose();
  double s_nu = score_vec[m] / nu;
  double s_prime = n / nu - n * trigamma(nu);
  out(m, m) = nu * s_nu + nu * nu * s_prime;
}

FittedModel fit_gaussian(const ModelSpec& spec, const Design& design,
                         const Vector& y) {
  const auto n = design.n();
  const auto m = design.m();
  Matrix xtx = design.features.transpose() * design.features;
  Vector xty = design.features.transpose() * y;
  Eigen::LDLT<Matrix> ldlt(xtx);
  Vector d = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success ||
      d.minCoeff() <= 1e-14 * std::max(d.maxCoeff(), 1e-300))
    throw NumericError("singular design matrix");
  Vector beta = ldlt.solve(xty);
  Vector resid = y - design.features * beta;
  double sigma2 = resid.squaredNorm() / static_cast<double>(n);
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw NumericError("degenerate fit: zero residual variance");
  FittedModel out;
  out.spec = spec;
  out.beta = std::move(beta);
  out.dispersion = sigma2;
  out.log_likelihood =
      -0.5 * static_cast<double>(n) * (std::log(2.0 * M_PI * sigma2) + 1.0);
  out.iterations = 1;
  out.converged = true;
  (void)m;
  return out;
}

FittedModel fit_gamma(const ModelSpec& spec, const Design& design,
                      const Vector& y, const FitOptions& opts) {
  const auto n = design.n();
  const auto m = design.m();
  if ((y.array() <= 0.0).any())
    throw std::invalid_argument("gamma response must be positive");
  double sum_log_y = y.array().log().sum();

  Vector beta;
  double u;  // log nu
  if (opts.warm_start && opts.warm_start->beta.size() == m) {
    beta = opts.warm_start->beta;
    u = std::log(opts.warm_start->dispersion);
  } else {
    double ybar = y.mean();
    beta = Vector::Zero(m);
    beta[0] = link_eval(spec.link, ybar);
    double cv2 = (y.array() - ybar).square().sum() /
                 (static_cast<double>(n) * ybar * ybar);
    double nu0 = std::clamp(1.0 / std::max(cv2, 1e-6), kNuMin, kNuMax);
    u = std::log(nu0);
  }
  u = std::clamp(u, std::log(kNuMin), std::log(kNuMax));

  const double tol = opts.tol_scale * static_cast<double>(n);
  Vector eta = linear_predictor(design, beta);
  if (!eta_feasible(spec.link, eta))
    throw NumericError("gamma fit: starting linear predictor not positive");
  double ll = gamma_loglik(spec.link, design, y, eta, std::exp(u), sum_log_y);

  Vector g(m + 1), step(m + 1), beta_try(m);
  Matrix hess(m + 1, m + 1);
  int iter = 0;
  bool converged = false;
  int polish_left = 2;
  while (iter < opts.max_iter) {
    double nu = std::exp(u);
    gamma_score(spec.link, design, y, eta, nu, sum_log_y, g);
    if (!converged && g.lpNorm<Eigen::Infinity>() < tol) converged = true;
    if (converged && polish_left == 0) break;

    gamma_hessian(spec.link, design, y, eta, nu, g, hess);
    Eigen::LDLT<Matrix> ldlt(hess);
    step = -ldlt.solve(g);
    if (!step.allFinite()) {
      if (converged) break;
      throw NumericError("gamma fit: singular Hessian");
    }
    if (converged) {
      // Polish: contract onto the optimum so warm and cold starts agree
      // beyond the score tolerance.
      if (step.lpNorm<Eigen::Infinity>() <= 1e-12) break;
      --polish_left;
    }

    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h < 30; ++h) {
      beta_try = beta + lambda * step.head(m);
      double u_try = std::clamp(u + lambda * step[m], std::log(kNuMin),
                                std::log(kNuMax));
      Vector eta_try = linear_predictor(design, beta_try);
      double ll_try = gamma_loglik(spec.link, design, y, eta_try,
                                   std::exp(u_try), sum_log_y);
      if (std::isfinite(ll_try) &&
          (ll_try >= ll - 1e-12 * (1.0 + std::fabs(ll)) || converged)) {
        beta = beta_try;
        u = u_try;
        eta = std::move(eta_try);
        ll = ll_try;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    ++iter;
    if (!accepted) {
      if (!eta_feasible(spec.link, linear_predictor(design, beta + step.head(m))) &&
          !converged)
        throw NumericError(
            "gamma fit: could not keep linear predictor positive");
      break;
    }
  }

  double nu = std::exp(u);
  gamma_score(spec.link, design, y, eta, nu, sum_log_y, g);
  if (g.lpNorm<Eigen::Infinity>() < tol) converged = true;

  FittedModel out;
  out.spec = spec;
  out.beta = std::move(beta);
  out.dispersion = nu;
  out.log_likelihood = ll;
  out.iterations = std::max(iter, 1);
  out.converged = converged;
  return out;
}

// g(mu): the link function itself, used for intercept initialization.
double link_eval(Link link, double mu) {
  switch (link) {
    case Link::identity:
      return mu;
    case Link::inverse:
      return 1.0 / mu;
    case Link::log:
      return std::log(mu);
  }
  return mu;
}

}  // namespace

void ModelSpec::validate() const {
  if (degree < 1) throw std::invalid_argument("formula degree must be >= 1");
  if (family == Family::gaussian && link != Link::identity)
    throw std::invalid_argument("gaussian family requires the identity link");
  if (family == Family::gamma && link == Link::identity)
    throw std::invalid_argument("gamma family requires inverse or log link");
}

Family family_from_string(const std::string& s) {
  if (s == "gaussian") return Family::gaussian;
  if (s == "gamma") return Family::gamma;
  throw std::invalid_argument("unknown family: " + s);
}

Link link_from_string(const std::string& s) {
  if (s == "identity") return Link::identity;
  if (s == "inverse") return Link::inverse;
  if (s == "log") return Link::log;
  throw std::invalid_argument("unknown link: " + s);
}

std::string to_string(Family f) {
  return f == Family::gaussian ? "gaussian" : "gamma";
}

std::string to_string(Link l) {
  switch (l) {
    case Link::identity:
      return "identity";
    case Link::inverse:
      return "inverse";
    default:
      return "log";
  }
}

Design expand_design(const Matrix& x, int degree) {
  if (degree < 1) throw std::invalid_argument("formula degree must be >= 1");
  const auto n = x.rows();
  const auto d = x.cols();
  Design design;
  design.degree = degree;
  design.d = d;
  design.features.resize(n, 1 + d * degree);
  design.features.col(0).setOnes();
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::Index base = 1 + j * degree;
    design.features.col(base) = x.col(j);
    for (int p = 1; p < degree; ++p)
      design.features.col(base + p) =
          design.features.col(base + p - 1).cwiseProduct(x.col(j));
  }
  return design;
}

Vector expand_row(const Vector& x_row, int degree) {
  if (degree < 1) throw std::invalid_argument("formula degree must be >= 1");
  const auto d = x_row.size();
  Vector out(1 + d * degree);
  out[0] = 1.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    double v = 1.0;
    for (int p = 0; p < degree; ++p) {
      v *= x_row[j];
      out[1 + j * degree + p] = v;
    }
  }
  return out;
}

FittedModel fit_mle(const ModelSpec& spec, const Design& design,
                    const Vector& y, const FitOptions& opts) {
  spec.validate();
  if (design.n() != y.size())
    throw std::invalid_argument("design and response sizes differ");
  if (design.n() < design.m() + 2)
    throw std::invalid_argument("need at least m + 2 observations");
  if (spec.family == Family::gaussian) return fit_gaussian(spec, design, y);
  return fit_gamma(spec, design, y, opts);
}

double log_likelihood(const ModelSpec& spec, const Design& design,
                      const Vector& y, const Vector& beta, double dispersion) {
  if (!(dispersion > 0.0))
    throw std::invalid_argument("dispersion must be positive");
  Vector eta = design.features * beta;
  if (spec.family == Family::gaussian) {
    double rss = (y - eta).squaredNorm();
    return -0.5 * static_cast<double>(design.n()) *
               std::log(2.0 * M_PI * dispersion) -
           rss / (2.0 * dispersion);
  }
  return gamma_loglik(spec.link, design, y, eta, dispersion,
                      y.array().log().sum());
}

Vector score(const ModelSpec& spec, const Design& design, const Vector& y,
             const Vector& beta, double dispersion) {
  if (!(dispersion > 0.0))
    throw std::invalid_argument("dispersion must be positive");
  const auto m = design.m();
  Vector eta = design.features * beta;
  Vector out(m + 1);
  if (spec.family == Family::gaussian) {
    Vector resid = y - eta;
    out.head(m) = design.features.transpose() * resid / dispersion;
    out[m] = -0.5 * static_cast<double>(design.n()) +
             resid.squaredNorm() / (2.0 * dispersion);
    return out;
  }
  if (!eta_feasible(spec.link, eta))
    throw NumericError("score: linear predictor not in link domain");
  gamma_score(spec.link, design, y, eta, dispersion, y.array().log().sum(),
              out);
  return out;
}

double mean_response(const FittedModel& model, const Vector& x_row) {
  Vector f = expand_row(x_row, model.spec.degree);
  if (f.size() != model.beta.size())
    throw std::invalid_argument("predictor dimension mismatch");
  double eta = f.dot(model.beta);
  switch (model.spec.link) {
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

double log_density(const FittedModel& model, const Vector& x_row, double y) {
  double mu = mean_response(model, x_row);
  if (model.spec.family == Family::gaussian) {
    double z = y - mu;
    return -0.5 * std::log(2.0 * M_PI * model.dispersion) -
           z * z / (2.0 * model.dispersion);
  }
  return gamma_log_pdf(model.dispersion, model.dispersion / mu, y);
}

double cdf(const FittedModel& model, const Vector& x_row, double y) {
  double mu = mean_response(model, x_row);
  if (model.spec.family == Family::gaussian)
    return normal_cdf((y - mu) / std::sqrt(model.dispersion));
  return gamma_cdf(model.dispersion, model.dispersion / mu, y);
}

double quantile(const FittedModel& model, const Vector& x_row, double p) {
  double mu = mean_response(model, x_row);
  if (model.spec.family == Family::gaussian)
    return mu + std::sqrt(model.dispersion) * normal_quantile(p);
  return gamma_quantile(model.dispersion, model.dispersion / mu, p);
}

}  // namespace confglm

#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "confglm/glm.hpp"
#include "confglm/rng.hpp"
#include "oracles.hpp"

using namespace confglm;

namespace {

Dataset gamma_inverse_data(Eigen::Index n, double shape, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  data.x.resize(n, 1);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.x(i, 0) = rng.uniform();
    double rate = shape * (1.25 - data.x(i, 0));
    data.y[i] = rng.gamma(shape, rate);
  }
  return data;
}

}  // namespace

TEST_CASE("design expansion") {
  Matrix x(2, 2);
  x << 0.5, 2.0, -1.0, 3.0;
  Design d = expand_design(x, 3);
  REQUIRE(d.m() == 7);
  CHECK(d.features(0, 0) == 1.0);
  CHECK(d.features(0, 1) == 0.5);
  CHECK(d.features(0, 2) == 0.25);
  CHECK(d.features(0, 3) == 0.125);
  CHECK(d.features(0, 4) == 2.0);
  CHECK(d.features(0, 5) == 4.0);
  CHECK(d.features(0, 6) == 8.0);

  Vector row(2);
  row << 0.5, 2.0;
  CHECK((expand_row(row, 3) - d.features.row(0).transpose()).norm() == 0.0);
}

TEST_CASE("gaussian fit matches the analytic two-parameter solution") {
  // Simple regression: slope = Sxy/Sxx, intercept = ybar - slope xbar.
  Matrix x(5, 1);
  x << 0.0, 0.25, 0.5, 0.75, 1.0;
  Vector y(5);
  y << 1.1, 1.4, 2.2, 2.3, 3.1;

  double xbar = x.col(0).mean(), ybar = y.mean();
  double sxx = (x.col(0).array() - xbar).square().sum();
  double sxy = ((x.col(0).array() - xbar) * (y.array() - ybar)).sum();
  double slope = sxy / sxx, intercept = ybar - slope * xbar;

  ModelSpec spec;
  FittedModel fit = fit_mle(spec, expand_design(x, 1), y);
  CHECK(fit.converged);
  CHECK(std::fabs(fit.beta[0] - intercept) < 1e-12);
  CHECK(std::fabs(fit.beta[1] - slope) < 1e-12);

  double rss = (y.array() - intercept - slope * x.col(0).array())
                   .square()
                   .sum();
  CHECK(std::fabs(fit.dispersion - rss / 5.0) < 1e-12);
  double ll = -0.5 * 5.0 * (std::log(2.0 * M_PI * fit.dispersion) + 1.0);
  CHECK(std::fabs(fit.log_likelihood - ll) < 1e-10);
}

TEST_CASE("score vanishes at the MLE and matches finite differences away") {
  Dataset data = gamma_inverse_data(60, 2.0, 11);
  for (auto family : {Family::gaussian, Family::gamma}) {
    ModelSpec spec;
    spec.family = family;
    spec.link = family == Family::gamma ? Link::inverse : Link::identity;
    Design design = expand_design(data.x, 1);
    FittedModel fit = fit_mle(spec, design, data.y);
    REQUIRE(fit.converged);

    Vector s = score(spec, design, data.y, fit.beta, fit.dispersion);
    CHECK(s.lpNorm<Eigen::Infinity>() < 1e-5);

    // Central differences of the log likelihood in (beta, log dispersion).
    Vector theta(fit.beta.size() + 1);
    theta.head(fit.beta.size()) = fit.beta * 0.9;
    theta[fit.beta.size()] = std::log(fit.dispersion * 1.3);
    Vector analytic = score(spec, design, data.y,
                            theta.head(fit.beta.size()),
                            std::exp(theta[fit.beta.size()]));
    const double h = 1e-6;
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
      Vector tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      double lp = log_likelihood(spec, design, data.y,
                                 tp.head(fit.beta.size()),
                                 std::exp(tp[fit.beta.size()]));
      double lm = log_likelihood(spec, design, data.y,
                                 tm.head(fit.beta.size()),
                                 std::exp(tm[fit.beta.size()]));
      double fd = (lp - lm) / (2.0 * h);
      CHECK(std::fabs(fd - analytic[j]) <
            1e-5 * std::max(1.0, std::fabs(analytic[j])));
    }
  }
}

TEST_CASE("gamma fit is a local maximum and statistically consistent") {
  Dataset data = gamma_inverse_data(20000, 2.0, 5);
  ModelSpec spec{Family::gamma, Link::inverse, 1};
  Design design = expand_design(data.x, 1);
  FittedModel fit = fit_mle(spec, design, data.y);
  REQUIRE(fit.converged);

  // Consistency at this sample size: the truth is beta = (1.25, -1), nu = 2.
  CHECK(std::fabs(fit.beta[0] - 1.25) < 0.05);
  CHECK(std::fabs(fit.beta[1] + 1.0) < 0.08);
  CHECK(std::fabs(fit.dispersion - 2.0) < 0.08);

  // Local-maximum certificate under random perturbations.
  Rng rng(99);
  double ll = log_likelihood(spec, design, data.y, fit.beta, fit.dispersion);
  for (int t = 0; t < 100; ++t) {
    Vector beta = fit.beta;
    beta[0] += 1e-3 * rng.normal();
    beta[1] += 1e-3 * rng.normal();
    double nu = fit.dispersion * std::exp(1e-3 * rng.normal());
    CHECK(log_likelihood(spec, design, data.y, beta, nu) <= ll + 1e-9);
  }
}

TEST_CASE("gamma fit with log link recovers its generator") {
  Rng rng(17);
  const Eigen::Index n = 20000;
  Dataset data;
  data.x.resize(n, 1);
  data.y.resize(n);
  const double shape = 3.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    data.x(i, 0) = rng.uniform();
    double mu = std::exp(0.4 + 0.9 * data.x(i, 0));
    data.y[i] = rng.gamma(shape, shape / mu);
  }
  ModelSpec spec{Family::gamma, Link::log, 1};
  FittedModel fit = fit_mle(spec, expand_design(data.x, 1), data.y);
  REQUIRE(fit.converged);
  CHECK(std::fabs(fit.beta[0] - 0.4) < 0.05);
  CHECK(std::fabs(fit.beta[1] - 0.9) < 0.08);
  CHECK(std::fabs(fit.dispersion - 3.0) < 0.15);
}

TEST_CASE("warm starts reproduce cold fits") {
  Dataset data = gamma_inverse_data(80, 2.0, 23);
  ModelSpec spec{Family::gamma, Link::inverse, 1};
  Design design = expand_design(data.x, 1);
  FittedModel cold = fit_mle(spec, design, data.y);

  FitOptions opts;
  opts.warm_start = &cold;
  FittedModel warm = fit_mle(spec, design, data.y, opts);
  CHECK(warm.iterations <= 1);  // fixed point of the Newton ascent
  CHECK((warm.beta - cold.beta).lpNorm<Eigen::Infinity>() < 1e-10);
  CHECK(std::fabs(warm.dispersion - cold.dispersion) < 1e-10);

  // Warm start from a nearby (perturbed) model still lands on the optimum.
  FittedModel nearby = cold;
  nearby.beta[0] += 0.02;
  nearby.dispersion *= 1.05;
  opts.warm_start = &nearby;
  FittedModel warm2 = fit_mle(spec, design, data.y, opts);
  CHECK((warm2.beta - cold.beta).lpNorm<Eigen::Infinity>() < 1e-8);
  CHECK(std::fabs(warm2.dispersion - cold.dispersion) < 1e-8);
}

TEST_CASE("model distribution functions are coherent") {
  Dataset data = gamma_inverse_data(60, 2.0, 31);
  Vector x0(1);
  x0 << 0.4;

  SUBCASE("gamma") {
    ModelSpec spec{Family::gamma, Link::inverse, 1};
    FittedModel fit = fit_mle(spec, expand_design(data.x, 1), data.y);
    for (double p : {0.05, 0.3, 0.7, 0.95})
      CHECK(std::fabs(cdf(fit, x0, quantile(fit, x0, p)) - p) < 1e-8);
    auto pdf = [&](double y) { return std::exp(log_density(fit, x0, y)); };
    double mass = testing::simpson(pdf, 1e-9, quantile(fit, x0, 1.0 - 1e-9),
                                   40000);
    CHECK(std::fabs(mass - 1.0) < 1e-6);
  }

  SUBCASE("gaussian") {
    ModelSpec spec;
    FittedModel fit = fit_mle(spec, expand_design(data.x, 1), data.y);
    for (double p : {0.05, 0.3, 0.7, 0.95})
      CHECK(std::fabs(cdf(fit, x0, quantile(fit, x0, p)) - p) < 1e-8);
    auto pdf = [&](double y) { return std::exp(log_density(fit, x0, y)); };
    double mu = mean_response(fit, x0), sd = std::sqrt(fit.dispersion);
    double mass = testing::simpson(pdf, mu - 9.0 * sd, mu + 9.0 * sd, 20000);
    CHECK(std::fabs(mass - 1.0) < 1e-6);
  }
}

TEST_CASE("fit validation errors") {
  Matrix x(3, 1);
  x << 0.1, 0.2, 0.3;
  Vector y(3);
  y << 1.0, 2.0, 3.0;
  ModelSpec spec;
  CHECK_THROWS_AS(fit_mle(spec, expand_design(x, 1), y),
                  std::invalid_argument);

  ModelSpec bad;
  bad.family = Family::gaussian;
  bad.link = Link::inverse;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  // Inverse link rejects covariates whose linear predictor is nonpositive.
  Dataset data = gamma_inverse_data(40, 2.0, 7);
  ModelSpec gspec{Family::gamma, Link::inverse, 1};
  FittedModel fit = fit_mle(gspec, expand_design(data.x, 1), data.y);
  Vector far(1);
  far << 50.0;
  CHECK_THROWS_AS(mean_response(fit, far), NumericError);
}

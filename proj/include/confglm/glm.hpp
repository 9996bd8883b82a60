#pragma once

#include <optional>
#include <string>

#include "confglm/common.hpp"

namespace confglm {

enum class Family { gaussian, gamma };
enum class Link { identity, inverse, log };

// Family/link/formula description. The formula is intercept plus polynomial
// main effects of each predictor up to `degree`; no interaction terms.
struct ModelSpec {
  Family family = Family::gaussian;
  Link link = Link::identity;
  int degree = 1;

  void validate() const;
};

Family family_from_string(const std::string& s);
Link link_from_string(const std::string& s);
std::string to_string(Family f);
std::string to_string(Link l);

// Expanded feature matrix: column 0 is the intercept, then for each predictor
// its powers 1..degree, predictors in input order. m = 1 + d * degree.
struct Design {
  Matrix features;  // n x m
  int degree = 1;
  Eigen::Index d = 0;

  Eigen::Index n() const { return features.rows(); }
  Eigen::Index m() const { return features.cols(); }
};

Design expand_design(const Matrix& x, int degree);

// Expand a single predictor row into the feature vector (1, x1, x1^2, ...).
Vector expand_row(const Vector& x_row, int degree);

// Maximum-likelihood fit. dispersion is sigma^2 for gaussian and the shape
// for gamma; log_likelihood is evaluated at the returned parameters.
struct FittedModel {
  ModelSpec spec;
  Vector beta;
  double dispersion = 0.0;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct FitOptions {
  double tol_scale = 1e-8;  // converged when max|score| < tol_scale * n
  int max_iter = 100;
  const FittedModel* warm_start = nullptr;
};

FittedModel fit_mle(const ModelSpec& spec, const Design& design,
                    const Vector& y, const FitOptions& opts = {});

double log_likelihood(const ModelSpec& spec, const Design& design,
                      const Vector& y, const Vector& beta, double dispersion);

// Gradient of the log likelihood in (beta, log dispersion) coordinates.
Vector score(const ModelSpec& spec, const Design& design, const Vector& y,
             const Vector& beta, double dispersion);

// Mean response at a raw predictor row; errors if the linear predictor is
// outside the link's domain (e.g. nonpositive for the inverse link).
double mean_response(const FittedModel& model, const Vector& x_row);

// Per-observation distribution at covariate x_row.
double log_density(const FittedModel& model, const Vector& x_row, double y);
double cdf(const FittedModel& model, const Vector& x_row, double y);
double quantile(const FittedModel& model, const Vector& x_row, double p);

// True iff the family's support is the positive half line.
inline bool positive_support(Family f) { return f == Family::gamma; }

}  // namespace confglm

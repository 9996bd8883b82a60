#pragma once

namespace confglm {

// Regularized lower incomplete gamma P(s, x), s > 0, x >= 0.
// Series expansion for x < s + 1, continued fraction otherwise; accurate to
// better than 1e-12 over the parameter ranges used here.
double regularized_lower_gamma(double s, double x);

// Digamma / trigamma via upward recurrence into the asymptotic regime.
double digamma(double x);
double trigamma(double x);

double normal_cdf(double z);
double normal_pdf(double z);

// Inverse of normal_cdf, solved by bracketed root-finding to |cdf - p| <= 1e-9
// and then refined; p in (0, 1).
double normal_quantile(double p);

double gamma_cdf(double shape, double rate, double y);
double gamma_log_pdf(double shape, double rate, double y);

// Inverse of gamma_cdf in y for fixed (shape, rate), bracketed root-finding
// to |cdf - p| <= 1e-9; p in [0, 1), returns 0 for p = 0.
double gamma_quantile(double shape, double rate, double p);

}  // namespace confglm

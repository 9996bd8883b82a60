#include "confglm/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace confglm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Series representation, valid and fast for x < s + 1.
double lower_gamma_series(double s, double x) {
  double ap = s;
  double sum = 1.0 / s;
  double term = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Continued fraction for the upper tail (modified Lentz), x >= s + 1.
double upper_gamma_cf(double s, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
}

// Bracketed root of an increasing function g on [lo, hi] with g(lo) <= 0 <=
// g(hi), Illinois variant of regula falsi.
template <typename F>
double illinois_root(F g, double lo, double hi, double glo, double ghi,
                     double tol) {
  int side = 0;
  for (int i = 0; i < 200; ++i) {
    double mid = (ghi != glo) ? (lo * ghi - hi * glo) / (ghi - glo)
                              : 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
    double gm = g(mid);
    if (std::fabs(gm) <= tol || hi - lo < 1e-15 * (1.0 + std::fabs(mid)))
      return mid;
    if (gm < 0) {
      lo = mid;
      glo = gm;
      if (side == -1) ghi *= 0.5;
      side = -1;
    } else {
      hi = mid;
      ghi = gm;
      if (side == 1) glo *= 0.5;
      side = 1;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double regularized_lower_gamma(double s, double x) {
  if (!(s > 0.0)) throw std::invalid_argument("shape must be positive");
  if (x < 0.0) throw std::invalid_argument("x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (x < s + 1.0) return lower_gamma_series(s, x);
  return 1.0 - upper_gamma_cf(s, x);
}

double digamma(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("digamma needs x > 0");
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  double inv = 1.0 / x;
  double inv2 = inv * inv;
  double series = std::log(x) - 0.5 * inv -
                  inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 -
                          inv2 * (1.0 / 240 - inv2 * (1.0 / 132)))));
  return acc + series;
}

double trigamma(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("trigamma needs x > 0");
  double acc = 0.0;
  while (x < 10.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  double inv = 1.0 / x;
  double inv2 = inv * inv;
  // 1/x + 1/(2x^2) + sum of Bernoulli terms B_2k / x^(2k+1).
  double series =
      inv + 0.5 * inv2 +
      inv * inv2 *
          (1.0 / 6 -
           inv2 * (1.0 / 30 -
                   inv2 * (1.0 / 42 -
                           inv2 * (1.0 / 30 - inv2 * (5.0 / 66)))));
  return acc + series;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile needs p in (0,1)");
  double lo = -40.0, hi = 40.0;
  auto g = [p](double z) { return normal_cdf(z) - p; };
  double z = illinois_root(g, lo, hi, 0.0 - p, 1.0 - p, 1e-10);
  // Newton polish; pdf is well away from zero wherever p is representable.
  for (int i = 0; i < 3; ++i) {
    double f = normal_cdf(z) - p;
    double d = normal_pdf(z);
    if (d <= 0) break;
    z -= f / d;
  }
  return z;
}

double gamma_cdf(double shape, double rate, double y) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw std::invalid_argument("gamma_cdf needs positive shape and rate");
  if (y <= 0.0) return 0.0;
  return regularized_lower_gamma(shape, rate * y);
}

double gamma_log_pdf(double shape, double rate, double y) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw std::invalid_argument("gamma_log_pdf needs positive shape and rate");
  if (y <= 0.0) return -kInf;
  return shape * std::log(rate) - std::lgamma(shape) +
         (shape - 1.0) * std::log(y) - rate * y;
}

double gamma_quantile(double shape, double rate, double p) {
  if (!(p >= 0.0 && p < 1.0))
    throw std::invalid_argument("gamma_quantile needs p in [0,1)");
  if (p == 0.0) return 0.0;
  // Solve at rate 1 (scale-free) and rescale on return. Wilson-Hilferty
  // start; when its cube root goes nonpositive (deep left tail) fall back to
  // inverting the leading term P(s, x) ~ x^s / Gamma(s+1).
  double x;
  {
    double z = normal_quantile(p);
    double c = 1.0 - 1.0 / (9.0 * shape) + z / (3.0 * std::sqrt(shape));
    if (c > 0.2) {
      if (c > 2.0) c = 2.0;
      x = shape * c * c * c;
    } else {
      x = std::exp((std::log(p) + std::lgamma(shape + 1.0)) / shape);
      if (x <= 0.0) return 0.0;  // below double-precision resolution
    }
  }
  // Safeguarded Newton on P(s, x) - p, keeping a bracket around the root.
  double blo = 0.0, bhi = kInf;
  for (int i = 0; i < 200; ++i) {
    double f = regularized_lower_gamma(shape, x) - p;
    if (f == 0.0) break;
    if (f > 0.0)
      bhi = x;
    else
      blo = x;
    double d = std::exp(gamma_log_pdf(shape, 1.0, x));
    double xn = (d > 0.0) ? x - f / d : kInf;
    if (!(xn > blo && xn < bhi))
      xn = std::isfinite(bhi) ? 0.5 * (blo + bhi) : 2.0 * x;
    if (std::fabs(xn - x) <= 1e-14 * x) {
      x = xn;
      break;
    }
    x = xn;
  }
  return x / rate;
}

}  // namespace confglm

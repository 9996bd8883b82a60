// Internal helpers shared by the region implementations. Not installed.
#pragma once

#include <algorithm>
#include <cmath>

#include "confglm/common.hpp"
#include "confglm/glm.hpp"

namespace confglm::detail {

// Gaussian least-squares refits against data augmented with one extra row.
//
// With sufficient statistics S = X'X, t = X'y, q = y'y, augmenting by the
// query feature row f and candidate response y gives normal equations
// (S + f f') beta = t + y f, so beta(y) = c0 + y c1 with c0, c1 fixed per
// query, and RSS(y) = r0 + r1 y + r2 y^2 is an explicit quadratic.
struct GaussianAugmentor {
  Matrix S;
  Vector t;
  double q = 0.0;
  Eigen::Index n = 0;
  const Design* design = nullptr;
  const Vector* y = nullptr;

  Vector f, c0, c1, a, b;
  double a_cand = 0.0, b_cand = 0.0;
  double r0 = 0.0, r1 = 0.0, r2 = 0.0;
  Eigen::LDLT<Matrix> ldlt;  // factor of S + f f', kept for secondary solves

  void init(const Design& dsn, const Vector& response) {
    design = &dsn;
    y = &response;
    n = dsn.n();
    S = dsn.features.transpose() * dsn.features;
    t = dsn.features.transpose() * response;
    q = response.squaredNorm();
  }

  void set_query(const Vector& features) {
    f = features;
    Matrix S_aug = S + f * f.transpose();
    ldlt.compute(S_aug);
    Vector d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success ||
        d.minCoeff() <= 1e-14 * std::max(d.maxCoeff(), 1e-300))
      throw NumericError("singular least-squares system");
    c0 = ldlt.solve(t);
    c1 = ldlt.solve(f);
    a = design->features * c0;
    b = design->features * c1;
    a_cand = f.dot(c0);
    b_cand = f.dot(c1);
    r0 = q - t.dot(c0);
    r1 = -(t.dot(c1) + f.dot(c0));
    r2 = 1.0 - f.dot(c1);
  }

  double resid(Eigen::Index i, double cand) const {
    return (*y)[i] - a[i] - b[i] * cand;
  }
  double resid_cand(double cand) const {
    return cand - a_cand - b_cand * cand;
  }
  double sigma2(double cand) const {
    return (r0 + cand * (r1 + cand * r2)) / static_cast<double>(n + 1);
  }
};

}  // namespace confglm::detail

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace confglm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Numeric failure (non-convergence, degenerate data, empty bin, ...).
// The CLI maps this to exit code 2; std::invalid_argument maps to 1.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// floor/ceil with a small absolute nudge so products like (n+1)*alpha that
// are integers in exact arithmetic cannot land on the wrong side of the
// integer because of the binary representation of alpha.
inline double floor_guard(double v) { return std::floor(v + 1e-9); }
inline double ceil_guard(double v) { return std::ceil(v - 1e-9); }

// Raw observations: x holds one predictor per column (n x d), y the response.
struct Dataset {
  Matrix x;
  Vector y;

  Eigen::Index n() const { return y.size(); }
  Eigen::Index d() const { return x.cols(); }
};

}  // namespace confglm

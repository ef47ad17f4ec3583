#pragma once

#include "cate/types.hpp"

namespace cate {

struct RidgeConfig {
  double l2 = 1.0;  // penalty on slope coefficients; the intercept is never penalized
  bool fit_intercept = true;
};

struct LinearModel {
  Vector coef;
  double intercept = 0.0;
  // Set when the normal equations were singular and a minimum-norm
  // least-squares solution was returned instead.
  bool pseudo_solution = false;

  Vector predict(const Matrix& x) const;
};

// Minimizes ||y - b - X w||^2 + l2 * ||w||^2 in closed form.
LinearModel fit_ridge(const Matrix& x, const Vector& y, const RidgeConfig& cfg);

// Solves the symmetric positive semi-definite system A z = b. Uses a Cholesky
// factorization when A is numerically nonsingular, otherwise a complete
// orthogonal decomposition (minimum-norm solution). `singular` reports which
// path was taken.
Vector solve_normal_equations(const Matrix& a, const Vector& b, bool* singular = nullptr);

}  // namespace cate

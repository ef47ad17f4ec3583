#pragma once

#include "cate/types.hpp"

namespace cate {

struct LogisticConfig {
  double l2 = 1e-3;  // on the mean log-loss scale
  bool fit_intercept = true;
  int max_iter = 100;
  double tol = 1e-10;
};

struct PropensityModel {
  Vector coef;
  double intercept = 0.0;
  int iterations = 0;

  Vector predict_proba(const Matrix& x) const;
};

// Penalized maximum likelihood for P(T = 1 | X) by Newton's method on
//   (1/n) sum logloss(t_i, sigma(b + x_i w)) + (l2 / 2) ||w||^2.
// Throws PositivityError when t contains a single class.
PropensityModel fit_logistic(const Matrix& x, const Vector& t, const LogisticConfig& cfg = {});

double sigmoid(double z) noexcept;

}  // namespace cate

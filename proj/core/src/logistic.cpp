#include "cate/logistic.hpp"

#include <cmath>

#include "cate/error.hpp"

namespace cate {

double sigmoid(double z) noexcept {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Vector PropensityModel::predict_proba(const Matrix& x) const {
  if (x.cols() != coef.size()) throw DimensionError("logistic: column count mismatch");
  Vector z = (x * coef).array() + intercept;
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

PropensityModel fit_logistic(const Matrix& x, const Vector& t, const LogisticConfig& cfg) {
  if (x.rows() != t.size()) throw DimensionError("logistic: x and t row counts differ");
  const Index n = x.rows();
  const Index treated = static_cast<Index>((t.array() > 0.5).count());
  if (n == 0 || treated == 0 || treated == n) {
    throw PositivityError("logistic: treatment vector contains a single class");
  }
  if (!(cfg.l2 >= 0.0)) throw ConfigError("logistic: l2 must be nonnegative");

  const Index d = x.cols();
  const Index offset = cfg.fit_intercept ? 1 : 0;
  const Index p = d + offset;
  Matrix z(n, p);
  if (cfg.fit_intercept) z.col(0).setOnes();
  z.rightCols(d) = x;

  Vector penalty = Vector::Constant(p, cfg.l2);
  if (cfg.fit_intercept) penalty[0] = 0.0;

  // Start from the marginal log-odds so the intercept-only case converges in
  // one step.
  Vector beta = Vector::Zero(p);
  if (cfg.fit_intercept) {
    const double rate = static_cast<double>(treated) / static_cast<double>(n);
    beta[0] = std::log(rate / (1.0 - rate));
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  int iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    const Vector eta = z * beta;
    const Vector prob = eta.unaryExpr([](double v) { return sigmoid(v); });
    const Vector w = (prob.array() * (1.0 - prob.array())).max(1e-12);
    Vector grad = inv_n * (z.transpose() * (prob - t));
    grad.array() += penalty.array() * beta.array();
    Matrix hess = inv_n * (z.transpose() * w.asDiagonal() * z);
    hess.diagonal() += penalty;
    // Tiny ridge keeps the Newton step defined for separable data when l2 = 0.
    hess.diagonal().array() += 1e-12;
    const Vector step = hess.ldlt().solve(grad);
    beta -= step;
    if (!beta.allFinite()) throw DivergenceError("logistic: Newton iteration diverged", iter);
    if (step.cwiseAbs().maxCoeff() < cfg.tol) {
      ++iter;
      break;
    }
  }

  PropensityModel m;
  m.intercept = cfg.fit_intercept ? beta[0] : 0.0;
  m.coef = beta.tail(d);
  m.iterations = iter;
  return m;
}

}  // namespace cate

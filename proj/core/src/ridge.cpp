#include "cate/ridge.hpp"

#include <cmath>
#include <limits>

#include "cate/error.hpp"

namespace cate {

Vector LinearModel::predict(const Matrix& x) const {
  if (x.cols() != coef.size()) {
    throw DimensionError("linear model: expected " + std::to_string(coef.size()) +
                         " columns, got " + std::to_string(x.cols()));
  }
  return (x * coef).array() + intercept;
}

Vector solve_normal_equations(const Matrix& a, const Vector& b, bool* singular) {
  Eigen::LDLT<Matrix> ldlt(a);
  bool is_singular = ldlt.info() != Eigen::Success;
  if (!is_singular) {
    const Vector d = ldlt.vectorD();
    const double scale = std::max(d.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    const double tol = 1e-12 * scale * static_cast<double>(a.rows());
    is_singular = (d.array() <= tol).any();
  }
  if (singular) *singular = is_singular;
  if (!is_singular) return ldlt.solve(b);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  cod.setThreshold(1e-12);
  return cod.solve(b);
}

LinearModel fit_ridge(const Matrix& x, const Vector& y, const RidgeConfig& cfg) {
  if (x.rows() != y.size()) throw DimensionError("ridge: x and y row counts differ");
  if (x.rows() < 1) throw DimensionError("ridge: need at least one row");
  if (!(cfg.l2 >= 0.0)) throw ConfigError("ridge: l2 must be nonnegative");

  const Index d = x.cols();
  const Index offset = cfg.fit_intercept ? 1 : 0;
  Matrix a(d + offset, d + offset);
  Vector b(d + offset);
  a.bottomRightCorner(d, d).noalias() = x.transpose() * x;
  b.tail(d).noalias() = x.transpose() * y;
  if (cfg.fit_intercept) {
    const Vector col_sums = x.colwise().sum().transpose();
    a(0, 0) = static_cast<double>(x.rows());
    a.block(0, 1, 1, d) = col_sums.transpose();
    a.block(1, 0, d, 1) = col_sums;
    b[0] = y.sum();
  }
  a.diagonal().tail(d).array() += cfg.l2;

  bool singular = false;
  const Vector beta = solve_normal_equations(a, b, &singular);
  LinearModel m;
  m.intercept = cfg.fit_intercept ? beta[0] : 0.0;
  m.coef = beta.tail(d);
  m.pseudo_solution = singular;
  return m;
}

}  // namespace cate

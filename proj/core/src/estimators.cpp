#include "cate/estimators.hpp"

#include "cate/error.hpp"

namespace cate {

Vector CateEstimator::predict_mu0(const Matrix&) const {
  throw Error(kind() + ": estimator has no potential-outcome heads");
}

Vector CateEstimator::predict_mu1(const Matrix&) const {
  throw Error(kind() + ": estimator has no potential-outcome heads");
}

Vector LinearTwoModelEstimator::predict_tau(const Matrix& x) const {
  return mu1_.predict(x) - mu0_.predict(x);
}

LinearModel LinearTwoModelEstimator::effect_model() const {
  LinearModel m;
  m.coef = mu1_.coef - mu0_.coef;
  m.intercept = mu1_.intercept - mu0_.intercept;
  m.pseudo_solution = mu0_.pseudo_solution || mu1_.pseudo_solution;
  return m;
}

Matrix with_treatment_column(const Matrix& x, double arm) {
  Matrix z(x.rows(), x.cols() + 1);
  z.leftCols(x.cols()) = x;
  z.col(x.cols()).setConstant(arm);
  return z;
}

Matrix with_treatment_column(const Matrix& x, const Vector& t) {
  if (t.size() != x.rows()) throw DimensionError("treatment column length mismatch");
  Matrix z(x.rows(), x.cols() + 1);
  z.leftCols(x.cols()) = x;
  z.col(x.cols()) = t;
  return z;
}

Vector LinearSLearnerEstimator::predict_mu0(const Matrix& x) const {
  return model_.predict(with_treatment_column(x, 0.0));
}

Vector LinearSLearnerEstimator::predict_mu1(const Matrix& x) const {
  return model_.predict(with_treatment_column(x, 1.0));
}

Vector LinearSLearnerEstimator::predict_tau(const Matrix& x) const {
  return predict_mu1(x) - predict_mu0(x);
}

Vector MlpSLearnerEstimator::predict_arm(const Matrix& x, double arm) const {
  return mlp_forward(params_.layers, with_treatment_column(x, arm), false).col(0);
}

Vector MlpSLearnerEstimator::predict_mu0(const Matrix& x) const { return predict_arm(x, 0.0); }

Vector MlpSLearnerEstimator::predict_mu1(const Matrix& x) const { return predict_arm(x, 1.0); }

Vector MlpSLearnerEstimator::predict_tau(const Matrix& x) const {
  return predict_mu1(x) - predict_mu0(x);
}

Vector MlpEffectEstimator::predict_tau(const Matrix& x) const {
  return mlp_forward(params_.layers, x, false).col(0);
}

}  // namespace cate

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cate/mlp.hpp"
#include "cate/ridge.hpp"
#include "cate/train.hpp"
#include "cate/two_head.hpp"
#include "cate/types.hpp"

namespace cate {

// Common prediction contract for every CATE learner. Learners with potential
// outcome heads also expose mu0/mu1, and then predict_tau agrees with
// predict_mu1 - predict_mu0.
class CateEstimator {
 public:
  virtual ~CateEstimator() = default;

  virtual std::string kind() const = 0;
  virtual Vector predict_tau(const Matrix& x) const = 0;

  virtual bool has_outcome_heads() const { return false; }
  // Throw Error when has_outcome_heads() is false.
  virtual Vector predict_mu0(const Matrix& x) const;
  virtual Vector predict_mu1(const Matrix& x) const;
};

using EstimatorPtr = std::shared_ptr<const CateEstimator>;

// Two linear outcome models (T-learner, closed-form H-learner).
class LinearTwoModelEstimator final : public CateEstimator {
 public:
  LinearTwoModelEstimator(std::string kind, LinearModel mu0, LinearModel mu1)
      : kind_(std::move(kind)), mu0_(std::move(mu0)), mu1_(std::move(mu1)) {}

  std::string kind() const override { return kind_; }
  Vector predict_tau(const Matrix& x) const override;
  bool has_outcome_heads() const override { return true; }
  Vector predict_mu0(const Matrix& x) const override { return mu0_.predict(x); }
  Vector predict_mu1(const Matrix& x) const override { return mu1_.predict(x); }

  const LinearModel& model0() const noexcept { return mu0_; }
  const LinearModel& model1() const noexcept { return mu1_; }
  // Implied effect model: intercept and slopes of mu1 - mu0.
  LinearModel effect_model() const;

 private:
  std::string kind_;
  LinearModel mu0_;
  LinearModel mu1_;
};

// Linear model on [x, t]; the last coefficient is the treatment column.
class LinearSLearnerEstimator final : public CateEstimator {
 public:
  explicit LinearSLearnerEstimator(LinearModel model) : model_(std::move(model)) {}

  std::string kind() const override { return "s_learner"; }
  Vector predict_tau(const Matrix& x) const override;
  bool has_outcome_heads() const override { return true; }
  Vector predict_mu0(const Matrix& x) const override;
  Vector predict_mu1(const Matrix& x) const override;

  const LinearModel& model() const noexcept { return model_; }

 private:
  LinearModel model_;
};

// A single regression whose output is the effect itself (direct learners).
class LinearEffectEstimator final : public CateEstimator {
 public:
  LinearEffectEstimator(std::string kind, LinearModel model)
      : kind_(std::move(kind)), model_(std::move(model)) {}

  std::string kind() const override { return kind_; }
  Vector predict_tau(const Matrix& x) const override { return model_.predict(x); }
  const LinearModel& model() const noexcept { return model_; }

 private:
  std::string kind_;
  LinearModel model_;
};

// TARNet, TARNet-WR, OffsetNet, neural H-learner and the neural T-learner
// (empty trunk).
class TwoHeadEstimator final : public CateEstimator {
 public:
  TwoHeadEstimator(std::string kind, TwoHeadNet net, TrainResult fit = {})
      : kind_(std::move(kind)), net_(std::move(net)), trace_(std::move(fit.trace)),
        best_epoch_(fit.best_epoch) {}

  std::string kind() const override { return kind_; }
  Vector predict_tau(const Matrix& x) const override { return net_.forward(x).tau; }
  bool has_outcome_heads() const override { return true; }
  Vector predict_mu0(const Matrix& x) const override { return net_.forward(x).f0; }
  Vector predict_mu1(const Matrix& x) const override { return net_.forward(x).f1; }

  const TwoHeadNet& net() const noexcept { return net_; }
  const LossTrace& trace() const noexcept { return trace_; }
  int best_epoch() const noexcept { return best_epoch_; }

 private:
  std::string kind_;
  TwoHeadNet net_;
  LossTrace trace_;
  int best_epoch_ = -1;
};

// Single network on [x, t] (neural S-learner).
class MlpSLearnerEstimator final : public CateEstimator {
 public:
  MlpSLearnerEstimator(MlpSpec spec, ParameterSet params, TrainResult fit = {})
      : spec_(std::move(spec)), params_(std::move(params)), trace_(std::move(fit.trace)) {}

  std::string kind() const override { return "s_learner"; }
  Vector predict_tau(const Matrix& x) const override;
  bool has_outcome_heads() const override { return true; }
  Vector predict_mu0(const Matrix& x) const override;
  Vector predict_mu1(const Matrix& x) const override;

  const MlpSpec& spec() const noexcept { return spec_; }
  const ParameterSet& params() const noexcept { return params_; }
  const LossTrace& trace() const noexcept { return trace_; }

 private:
  Vector predict_arm(const Matrix& x, double arm) const;

  MlpSpec spec_;
  ParameterSet params_;
  LossTrace trace_;
};

// Single network regressing the effect (neural direct learners).
class MlpEffectEstimator final : public CateEstimator {
 public:
  MlpEffectEstimator(std::string kind, MlpSpec spec, ParameterSet params, TrainResult fit = {})
      : kind_(std::move(kind)), spec_(std::move(spec)), params_(std::move(params)),
        trace_(std::move(fit.trace)) {}

  std::string kind() const override { return kind_; }
  Vector predict_tau(const Matrix& x) const override;

  const MlpSpec& spec() const noexcept { return spec_; }
  const ParameterSet& params() const noexcept { return params_; }
  const LossTrace& trace() const noexcept { return trace_; }

 private:
  std::string kind_;
  MlpSpec spec_;
  ParameterSet params_;
  LossTrace trace_;
};

// Appends a column of constant `arm` to x.
Matrix with_treatment_column(const Matrix& x, double arm);
Matrix with_treatment_column(const Matrix& x, const Vector& t);

}  // namespace cate

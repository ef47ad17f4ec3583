#pragma once

#include <memory>
#include <optional>

#include "cate/data.hpp"
#include "cate/estimators.hpp"
#include "cate/learner_config.hpp"
#include "cate/pseudo.hpp"

namespace cate {

// ---------------------------------------------------------------------------
// Indirect learners

// Independent outcome models on D0 and D1. With a neural base each arm gets its
// own network, checkpointed on the factual error of that arm's validation rows.
EstimatorPtr fit_t_learner(const ObservationalDataset& data, const BaseConfig& base,
                           const Validation* val = nullptr);

// One model on [x, t]; tau(x) = mu(x, 1) - mu(x, 0).
EstimatorPtr fit_s_learner(const ObservationalDataset& data, const BaseConfig& base,
                           const Validation* val = nullptr);

// Shared trunk, two heads, factual squared error.
TwoHeadEstimator fit_tarnet(const ObservationalDataset& data, const NetConfig& net,
                            const Validation* val = nullptr);

// TARNet plus rho * sum ||W0 - W1||^2 over corresponding head parameters.
TwoHeadEstimator fit_tarnet_wr(const ObservationalDataset& data, const NetConfig& net,
                               const WeightRegConfig& wr, const Validation* val = nullptr);

// Heads output mu0 and tau; treated rows are fit by mu0 + tau.
TwoHeadEstimator fit_offsetnet(const ObservationalDataset& data, const NetConfig& net,
                               const Validation* val = nullptr);

// ---------------------------------------------------------------------------
// Direct learners

// Regresses pseudo-outcomes built from `nuisances` on x.
EstimatorPtr fit_direct(const ObservationalDataset& data, PseudoKind kind,
                        const NuisanceSet& nuisances, const BaseConfig& base,
                        const Validation* val = nullptr);

// Regression of arbitrary effect targets on x.
EstimatorPtr fit_effect_regression(const Matrix& x, const Vector& targets, const BaseConfig& base,
                                   std::string kind, const Validation* val = nullptr);

// ---------------------------------------------------------------------------
// Hybrid learner

struct HLearnerConfig {
  double lambda = 0.5;
  PseudoKind pseudo = PseudoKind::X;
  // Regress f1 - f0 towards zero instead of a pseudo-outcome.
  bool zero_pseudo = false;
  BaseConfig base;
  NuisanceConfig stage1;
  // Fit stage 1 on one half of the rows and stage 2 on the other.
  bool sample_split = false;
  std::uint64_t split_seed = 0;

  void validate() const;
};

struct HLoss {
  double total = 0.0;
  double indirect = 0.0;  // mean (y - f_t)^2
  double direct = 0.0;    // mean (f1 - f0 - y_phi)^2
};

// (1 - lambda) * mean indirect + lambda * mean direct over the given rows.
// When d_f0/d_f1 are non-null they receive dLoss/df per row.
HLoss h_loss(const Vector& f0, const Vector& f1, const Vector& t, const Vector& y,
             const Vector& pseudo, double lambda, Vector* d_f0 = nullptr, Vector* d_f1 = nullptr);

// Full two-stage fit: nuisances (unless supplied), pseudo-outcomes, then the
// stage-2 model. Ridge base learners are solved in closed form.
EstimatorPtr fit_h_learner(const ObservationalDataset& data, const HLearnerConfig& cfg,
                           const NuisanceSet* nuisances = nullptr,
                           const Validation* val = nullptr);

// Stage 2 only, against precomputed pseudo-outcomes aligned with data rows.
EstimatorPtr fit_h_learner_on_pseudo(const ObservationalDataset& data, const Vector& pseudo,
                                     const HLearnerConfig& cfg, const Validation* val = nullptr);

// Closed-form minimizer over two linear heads (theta0, theta1) of
//   sum_i (1-lambda)(y_i - z_i theta_{t_i})^2 + lambda (z_i (theta1 - theta0) - p_i)^2
//     + l2 (||w0||^2 + ||w1||^2)
// with unpenalized intercepts.
LinearTwoModelEstimator solve_linear_h(const ObservationalDataset& data, const Vector& pseudo,
                                       double lambda, const RidgeConfig& ridge);

}  // namespace cate

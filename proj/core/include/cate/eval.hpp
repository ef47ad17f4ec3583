#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cate/data.hpp"
#include "cate/estimators.hpp"
#include "cate/learner_config.hpp"
#include "cate/metalearners.hpp"
#include "cate/pseudo.hpp"

namespace cate {

struct PeheResult {
  double mse = 0.0;   // epsilon_PEHE
  double root = 0.0;  // sqrt(epsilon_PEHE)
};

PeheResult pehe(const Vector& tau_hat, const Vector& tau_true);
PeheResult pehe(const CateEstimator& est, const Matrix& x, const Vector& tau_true);

// Imputed effect t (y - mu0) + (1 - t)(mu1 - y) per row.
Vector imputed_effects(const ObservationalDataset& data, const Vector& mu0, const Vector& mu1);

// Mean squared gap between tau_hat and the imputed effects on val rows.
double proxy_pehe(const Vector& tau_hat, const ObservationalDataset& val, const Vector& mu0_hat,
                  const Vector& mu1_hat);
double proxy_pehe(const Vector& f0, const Vector& f1, const ObservationalDataset& val,
                  const Vector& mu0_hat, const Vector& mu1_hat);

// Checkpoint criterion: proxy PEHE against effects imputed with the given
// outcome models on the validation rows.
Validation proxy_validation(const ObservationalDataset& val, const NuisanceSet& nuisances);
Validation proxy_validation(const ObservationalDataset& val, const Vector& mu0_val,
                            const Vector& mu1_val);

// Checkpoint criterion for outcome models: factual MSE on validation rows.
Validation factual_validation(const ObservationalDataset& val);

// Outcome models fit on validation rows only, evaluated on those rows.
struct ValidationNuisance {
  Vector mu0_check;
  Vector mu1_check;
  // Set when a validation arm had fewer than min_arm_rows rows and the
  // stage-1 predictions were used instead.
  bool fallback = false;
};

inline constexpr Index kMinValidationArmRows = 5;

ValidationNuisance fit_validation_nuisance(const ObservationalDataset& val,
                                           const NuisanceConfig& cfg,
                                           const NuisanceSet* stage1_fallback = nullptr);

struct LambdaSelection {
  std::vector<double> grid;
  std::vector<double> losses;  // validation criterion per grid point
  std::size_t chosen_index = 0;
  double chosen = 0.0;
  std::vector<EstimatorPtr> estimators;  // per grid point
  bool fallback = false;

  EstimatorPtr chosen_estimator() const { return estimators.at(chosen_index); }
};

// Argmin with ties broken towards the smaller lambda.
std::size_t argmin_lambda(std::span<const double> grid, std::span<const double> losses);

// Scores candidate effect predictions on validation rows against effects
// imputed with the validation-fitted outcome models.
std::vector<double> lambda_criteria(const ObservationalDataset& val, const ValidationNuisance& check,
                                    std::span<const Vector> tau_val);

std::vector<double> default_lambda_grid();

// Fits the validation nuisance, trains one H-learner per grid value on
// `train` (checkpointed with proxy PEHE against stage-1 predictions) and picks
// the lambda with the smallest validation criterion.
LambdaSelection select_lambda(const ObservationalDataset& train, const ObservationalDataset& val,
                              std::span<const double> grid, const HLearnerConfig& cfg,
                              const NuisanceSet& stage1, int jobs = 1);

struct Summary {
  double mean = 0.0;
  double se = 0.0;  // sample sd / sqrt(runs); 0 for a single run
  std::size_t runs = 0;
};

Summary summarize(std::span<const double> values);

struct RunPehe {
  double in_sample = 0.0;   // root PEHE on train + validation rows
  double out_sample = 0.0;  // root PEHE on test rows
};

struct EvaluationReport {
  std::vector<double> pehe_in;
  std::vector<double> pehe_out;
  Summary in;
  Summary out;
};

EvaluationReport aggregate(std::span<const RunPehe> runs);

std::string report_to_json(const std::string& learner, const EvaluationReport& report);

struct SummaryRow {
  std::string learner;
  EvaluationReport report;
};

// learner,in_mean,in_se,out_mean,out_se,runs
void write_summary_csv(const std::filesystem::path& path, std::span<const SummaryRow> rows);

}  // namespace cate

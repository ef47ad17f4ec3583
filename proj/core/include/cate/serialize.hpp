#pragma once

#include <filesystem>
#include <string>

#include "cate/data.hpp"
#include "cate/estimators.hpp"

namespace cate {

// A fitted estimator together with the preprocessing it was trained under.
// Predictions take raw covariates and return effects in outcome units.
struct FittedModel {
  EstimatorPtr estimator;
  StandardizationStats stats;

  Vector predict_tau(const Matrix& raw_x) const;
};

// Self-describing JSON dump: spec_version, estimator class and kind,
// architecture, every parameter, and the standardization statistics.
std::string model_to_json(const FittedModel& model);
FittedModel model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const FittedModel& model);
FittedModel load_model(const std::filesystem::path& path);

}  // namespace cate

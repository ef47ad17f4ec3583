#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cate/types.hpp"

namespace cate {

// Observational sample {(X_i, T_i, Y_i)}. Treatment is stored as 0.0/1.0 so it
// can enter arithmetic directly; make() enforces the binary invariant.
struct ObservationalDataset {
  Matrix x;  // n x d
  Vector t;  // n, entries in {0, 1}
  Vector y;  // n

  static ObservationalDataset make(Matrix x, Vector t, Vector y);

  Index size() const noexcept { return x.rows(); }
  Index dim() const noexcept { return x.cols(); }
  Index treated_count() const;

  // Throws ValidationError / DimensionError when an invariant fails.
  void validate() const;

  ObservationalDataset rows(std::span<const Index> idx) const;
};

// True potential-outcome means for generated data.
struct GroundTruth {
  Vector mu0;
  Vector mu1;
  Vector tau;

  static GroundTruth from_potential_outcomes(Vector mu0, Vector mu1);

  Index size() const noexcept { return tau.size(); }
  GroundTruth rows(std::span<const Index> idx) const;
};

struct SplitRatios {
  double train = 0.63;
  double val = 0.27;
  double test = 0.10;
};

struct DataSplit {
  std::vector<Index> train;
  std::vector<Index> val;
  std::vector<Index> test;
};

// Uniform random permutation of 0..n-1 cut into contiguous blocks. Block
// sizes use largest-remainder rounding of ratio * n, so each is within one row
// of its share; an empty block borrows a row from the largest one.
DataSplit split(Index n, const SplitRatios& ratios, std::uint64_t seed);

// Concatenation of two index lists, used for the in-sample (train + val) set.
std::vector<Index> concat(std::span<const Index> a, std::span<const Index> b);

struct StandardizationStats {
  Vector mean;
  Vector sd;  // population sd; constant features get 1
  std::optional<double> y_mean;
  std::optional<double> y_sd;

  Matrix apply(const Matrix& x) const;
  Matrix invert(const Matrix& z) const;

  bool scales_outcome() const noexcept { return y_mean.has_value(); }
  Vector apply_outcome(const Vector& y) const;
  // Maps standardized outcome-level predictions back to outcome units.
  Vector invert_outcome(const Vector& y) const;
  // Effects are differences, so only the scale is undone.
  Vector invert_effect(const Vector& tau) const;
};

StandardizationStats fit_standardization(const ObservationalDataset& train,
                                         bool standardize_outcome = false);

ObservationalDataset apply_standardization(const ObservationalDataset& data,
                                           const StandardizationStats& stats);

struct StandardizedSplit {
  ObservationalDataset train;
  std::vector<ObservationalDataset> others;
  StandardizationStats stats;
};

// z-scores train with its own statistics and applies them unchanged to others.
StandardizedSplit standardize(const ObservationalDataset& train,
                              std::span<const ObservationalDataset> others,
                              bool standardize_outcome = false);

// Rows with t == arm, order preserved. May be empty.
ObservationalDataset arm_subset(const ObservationalDataset& data, int arm);

// Column mapping for CSV ingestion. Every column that is not the treatment,
// outcome or a ground-truth column is a feature unless `features` lists them.
struct CsvSchema {
  std::string treatment = "t";
  std::string outcome = "y";
  std::string mu0 = "mu0";
  std::string mu1 = "mu1";
  std::vector<std::string> features;
};

struct LoadedDataset {
  ObservationalDataset data;
  std::optional<GroundTruth> truth;
  std::vector<std::string> feature_names;
};

LoadedDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

using ExtraColumn = std::pair<std::string, Vector>;

// Writes features, t, y, then mu0/mu1 when truth is given, then any extra
// columns. Doubles are printed in shortest round-trip form, so a load of the
// written file reproduces the values bit-exactly.
void save_csv(const std::filesystem::path& path, const ObservationalDataset& data,
              const GroundTruth* truth = nullptr,
              std::span<const std::string> feature_names = {},
              std::span<const ExtraColumn> extra = {});

std::vector<std::string> default_feature_names(Index d);

// Numeric table with a header row; every column is read as a feature.
struct CovariateTable {
  Matrix x;
  std::vector<std::string> names;
};
CovariateTable load_covariates_csv(const std::filesystem::path& path);

}  // namespace cate

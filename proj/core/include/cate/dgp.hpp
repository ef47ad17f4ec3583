#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cate/data.hpp"
#include "cate/types.hpp"

namespace cate {

struct GeneratedData {
  ObservationalDataset data;
  GroundTruth truth;
};

// One-dimensional sinusoidal potential outcomes
//   mu0(x) = sin(omega x),  mu1(x) = sin(omega x + delta) + beta.
// delta = 0 gives a constant effect; delta > 0 a heterogeneous one.
struct ToyDgpConfig {
  double omega = 2.0;
  double delta = 0.0;
  double beta = 1.0;
  double noise_sd = 0.3;
  Index n = 500;
  double x_low = -3.0;
  double x_high = 3.0;
  double treated_prob = 0.5;

  void validate() const;
};

double toy_mu0(const ToyDgpConfig& cfg, double x) noexcept;
double toy_mu1(const ToyDgpConfig& cfg, double x) noexcept;
double true_cate(const ToyDgpConfig& cfg, double x) noexcept;

// x ~ U[x_low, x_high], T ~ Bernoulli(treated_prob), Y = mu_T(x) + N(0, noise_sd^2).
GeneratedData generate_toy(const ToyDgpConfig& cfg, std::uint64_t seed);

// How the pairwise interaction sum over S_t is read.
enum class InteractionConvention {
  UnorderedPairs,  // j < k
  OrderedPairs,    // all (j, k) including j = k
};

// Quadratic response surfaces on random feature subsets of a covariate matrix,
// with optionally confounded assignment P(T=1|x) = sigmoid(alpha * sum beta_j x_j).
struct SemiSyntheticConfig {
  std::optional<Matrix> covariates;  // when absent: n x d standard normal
  Index n = 747;
  Index d = 25;
  Index s_size = 10;
  double shared_fraction = 0.4;
  double treated_fraction = 0.5;  // used when alpha == 0
  double alpha = 0.0;
  double noise_sd = 1.0;
  InteractionConvention interactions = InteractionConvention::UnorderedPairs;
  std::uint64_t seed = 0;

  Index covariate_dim() const { return covariates ? covariates->cols() : d; }
  Index shared_count() const;
  void validate() const;
};

// The random pieces of one semi-synthetic draw; enough to evaluate the true
// surfaces at any covariate row.
struct ResponseSurface {
  std::vector<Index> s0;
  std::vector<Index> s1;
  std::vector<Index> s;  // sorted union
  Vector beta;           // aligned with s
  InteractionConvention interactions = InteractionConvention::UnorderedPairs;

  double mu(int arm, const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  Index overlap() const;
};

struct SemiSyntheticData {
  GeneratedData generated;
  ResponseSurface surface;
  Vector propensity;
};

SemiSyntheticData generate_semi_synthetic(const SemiSyntheticConfig& cfg);

double true_cate(const ResponseSurface& surface, const Eigen::Ref<const Eigen::RowVectorXd>& row);

// Sum over j in S of beta_j x_j, the assignment score.
Vector assignment_score(const ResponseSurface& surface, const Matrix& x);

}  // namespace cate

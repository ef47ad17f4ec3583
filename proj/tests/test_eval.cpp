#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"

namespace cate {
namespace {

TEST(Pehe, OracleIsZero) {
  const Vector tau = test::random_matrix(10, 1, 1).col(0);
  EXPECT_EQ(pehe(tau, tau).mse, 0.0);
}

TEST(Pehe, ConstantBias) {
  const Vector tau = test::random_matrix(10, 1, 1).col(0);
  const auto p = pehe(Vector(tau.array() + 0.5), tau);
  EXPECT_NEAR(p.mse, 0.25, 1e-15);
  EXPECT_NEAR(p.root, 0.5, 1e-15);
}

TEST(Pehe, TwoPointHandValue) {
  Vector hat(2), truth(2);
  hat << 1.0, 3.0;
  truth << 0.0, 0.0;
  const auto p = pehe(hat, truth);
  EXPECT_EQ(p.mse, 5.0);
  EXPECT_EQ(p.root, std::sqrt(5.0));
}

TEST(Pehe, LengthMismatchIsDimensionError) {
  EXPECT_THROW(pehe(Vector::Zero(2), Vector::Zero(3)), DimensionError);
}

TEST(Aggregate, SingleRunHasZeroError) {
  const std::vector<double> v{1.7};
  const auto s = summarize(v);
  EXPECT_EQ(s.mean, 1.7);
  EXPECT_EQ(s.se, 0.0);
}

TEST(Aggregate, ThreeRuns) {
  const std::vector<RunPehe> runs{{1, 1}, {2, 2}, {3, 3}};
  const auto r = aggregate(runs);
  EXPECT_NEAR(r.out.mean, 2.0, 1e-12);
  EXPECT_NEAR(r.out.se, 1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_EQ(r.in.runs, 3u);
}

TEST(Aggregate, PermutationInvariant) {
  std::vector<double> v{0.3, 1.2, 0.7, 2.5, 0.9};
  const auto a = summarize(v);
  std::reverse(v.begin(), v.end());
  std::rotate(v.begin(), v.begin() + 2, v.end());
  const auto b = summarize(v);
  EXPECT_NEAR(a.mean, b.mean, 1e-15);
  EXPECT_NEAR(a.se, b.se, 1e-15);
}

TEST(Aggregate, ReportJsonNamesLearner) {
  const std::vector<RunPehe> runs{{1, 2}};
  const std::string json = report_to_json("tarnet", aggregate(runs));
  EXPECT_NE(json.find("\"tarnet\""), std::string::npos);
}

TEST(Proxy, ImputedEffects) {
  auto data = ObservationalDataset::make(Matrix::Zero(2, 1), Vector::Zero(2), Vector::Zero(2));
  data.t << 1, 0;
  data.y << 3, 1;
  Vector mu0(2), mu1(2);
  mu0 << 1, 0;
  mu1 << 0, 4;
  const Vector imp = imputed_effects(data, mu0, mu1);
  EXPECT_EQ(imp[0], 2.0);
  EXPECT_EQ(imp[1], 3.0);
}

TEST(Proxy, SingleRowHandValue) {
  auto data = ObservationalDataset::make(Matrix::Zero(1, 1), Vector::Ones(1), Vector::Ones(1));
  Vector mu0 = Vector::Zero(1), mu1 = Vector::Zero(1);
  EXPECT_DOUBLE_EQ(proxy_pehe(Vector::Constant(1, 2.0), data, mu0, mu1), 1.0);
  EXPECT_DOUBLE_EQ(proxy_pehe(Vector::Zero(1), Vector::Constant(1, 2.0), data, mu0, mu1), 1.0);
}

TEST(Proxy, NoiselessOracleEqualsTruePehe) {
  const test::LinearDgp g{Vector::Ones(2), Vector::Constant(2, 0.5), 1.0, 0.0, 0.0};
  const auto gen = test::linear_data(g, 100, 3);
  const Vector tau_hat = gen.truth.tau.array() + test::random_matrix(100, 1, 4).col(0).array();
  EXPECT_NEAR(proxy_pehe(tau_hat, gen.data, gen.truth.mu0, gen.truth.mu1),
              pehe(tau_hat, gen.truth.tau).mse, 1e-12);
  EXPECT_EQ(proxy_pehe(imputed_effects(gen.data, gen.truth.mu0, gen.truth.mu1), gen.data,
                       gen.truth.mu0, gen.truth.mu1),
            0.0);
}

TEST(LambdaSelection, ArgminBreaksTiesTowardsSmallerLambda) {
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const std::vector<double> losses{2.0, 1.0, 1.0};
  EXPECT_EQ(argmin_lambda(grid, losses), 1u);
  const std::vector<double> rev_grid{1.0, 0.5, 0.0};
  const std::vector<double> flat{1.0, 1.0, 1.0};
  EXPECT_EQ(argmin_lambda(rev_grid, flat), 2u);
}

TEST(LambdaSelection, DefaultGridIsElevenSteps) {
  const auto grid = default_lambda_grid();
  ASSERT_EQ(grid.size(), 11u);
  EXPECT_EQ(grid.front(), 0.0);
  EXPECT_EQ(grid.back(), 1.0);
}

TEST(LambdaSelection, PlantedExactCandidateWins) {
  const test::LinearDgp g{Vector::Ones(2), Vector::Constant(2, 0.5), 1.0, 0.0, 0.3};
  const auto gen = test::linear_data(g, 60, 5);
  NuisanceConfig cfg;
  cfg.outcome = OutcomeNuisance::TLearner;
  cfg.base.kind = BaseLearner::Ridge;
  const auto check = fit_validation_nuisance(gen.data, cfg);
  EXPECT_FALSE(check.fallback);
  const Vector exact = imputed_effects(gen.data, check.mu0_check, check.mu1_check);
  const std::vector<Vector> candidates{Vector(exact.array() + 0.2), exact, gen.truth.tau};
  const auto losses = lambda_criteria(gen.data, check, candidates);
  EXPECT_EQ(losses[1], 0.0);
  EXPECT_EQ(argmin_lambda(std::vector<double>{0.0, 0.5, 1.0}, losses), 1u);
}

TEST(LambdaSelection, SmallValidationArmFallsBack) {
  auto gen = test::linear_data({Vector::Ones(1), Vector::Zero(1)}, 20, 6);
  gen.data.t.setZero();
  gen.data.t.head(3).setOnes();
  NuisanceConfig cfg;
  cfg.outcome = OutcomeNuisance::TLearner;
  cfg.base.kind = BaseLearner::Ridge;
  EXPECT_THROW(fit_validation_nuisance(gen.data, cfg), PositivityError);
  const auto stage1 = NuisanceSet::oracle(
      nullptr, [](const Matrix& x) { return Vector::Zero(x.rows()).eval(); },
      [](const Matrix& x) { return Vector::Ones(x.rows()).eval(); });
  const auto check = fit_validation_nuisance(gen.data, cfg, &stage1);
  EXPECT_TRUE(check.fallback);
  EXPECT_TRUE(check.mu1_check.isOnes());
}

TEST(LambdaSelection, EmptyValidationArmIsPositivityError) {
  auto gen = test::linear_data({Vector::Ones(1), Vector::Zero(1)}, 20, 6);
  gen.data.t.setOnes();
  const auto stage1 = NuisanceSet::oracle(
      nullptr, [](const Matrix& x) { return Vector::Zero(x.rows()).eval(); },
      [](const Matrix& x) { return Vector::Zero(x.rows()).eval(); });
  EXPECT_THROW(fit_validation_nuisance(gen.data, {}, &stage1), PositivityError);
}

struct SelectFixture : ::testing::Test {
  GeneratedData train, val;
  HLearnerConfig cfg;
  NuisanceSet stage1;

  void SetUp() override {
    const test::LinearDgp g{Vector::Ones(2), Vector::Constant(2, 0.5), 1.0, 0.0, 0.3};
    train = test::linear_data(g, 120, 7);
    val = test::linear_data(g, 50, 8);
    cfg.base.kind = BaseLearner::Ridge;
    cfg.base.ridge.l2 = 0.5;
    cfg.stage1.outcome = OutcomeNuisance::TLearner;
    cfg.stage1.base.kind = BaseLearner::Ridge;
    stage1 = fit_nuisances(train.data, cfg.stage1);
  }
};

TEST_F(SelectFixture, SingletonGrid) {
  const std::vector<double> grid{0.3};
  const auto sel = select_lambda(train.data, val.data, grid, cfg, stage1);
  EXPECT_EQ(sel.chosen, 0.3);
  EXPECT_EQ(sel.chosen_index, 0u);
  EXPECT_EQ(sel.estimators.size(), 1u);
}

TEST_F(SelectFixture, ChoosesArgminOfReportedLosses) {
  const auto grid = default_lambda_grid();
  const auto sel = select_lambda(train.data, val.data, grid, cfg, stage1);
  ASSERT_EQ(sel.losses.size(), grid.size());
  EXPECT_EQ(sel.chosen_index, argmin_lambda(grid, sel.losses));
  EXPECT_EQ(sel.chosen, grid[sel.chosen_index]);
  const Matrix x = test::random_matrix(5, 2, 1);
  EXPECT_EQ(sel.chosen_estimator()->predict_tau(x), sel.estimators[sel.chosen_index]->predict_tau(x));
}

TEST_F(SelectFixture, ParallelMatchesSerial) {
  const auto grid = default_lambda_grid();
  const auto a = select_lambda(train.data, val.data, grid, cfg, stage1, 1);
  const auto b = select_lambda(train.data, val.data, grid, cfg, stage1, 4);
  EXPECT_EQ(a.losses, b.losses);
}

}  // namespace
}  // namespace cate

#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"

namespace cate {
namespace {

BaseConfig ridge_base(double l2) {
  BaseConfig b;
  b.kind = BaseLearner::Ridge;
  b.ridge.l2 = l2;
  return b;
}

test::LinearDgp shifted(double c) {
  Vector b0(3);
  b0 << 1.0, -0.5, 2.0;
  return {b0, Vector::Zero(3), c, 0.4, 0.0};
}

void expect_heads_consistent(const CateEstimator& est, const Matrix& x, double tol = 0.0) {
  ASSERT_TRUE(est.has_outcome_heads()) << est.kind();
  const Vector gap = est.predict_mu1(x) - est.predict_mu0(x);
  EXPECT_LE((est.predict_tau(x) - gap).cwiseAbs().maxCoeff(), tol) << est.kind();
}

TEST(TLearner, IdenticalArmsGiveZeroEffect) {
  const auto gen = test::linear_data(shifted(0.0), 200, 1);
  const auto est = fit_t_learner(gen.data, ridge_base(0.0));
  EXPECT_LT(est->predict_tau(test::random_matrix(50, 3, 2)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(TLearner, ConstantShiftRecovered) {
  const auto gen = test::linear_data(shifted(2.0), 200, 1);
  const auto est = fit_t_learner(gen.data, ridge_base(0.0));
  const Vector tau = est->predict_tau(test::random_matrix(50, 3, 2));
  EXPECT_LT((tau.array() - 2.0).abs().maxCoeff(), 1e-6);
}

TEST(TLearner, EmptyArmIsPositivityError) {
  auto gen = test::linear_data(shifted(0.0), 20, 1);
  gen.data.t.setOnes();
  EXPECT_THROW(fit_t_learner(gen.data, ridge_base(1.0)), PositivityError);
}

TEST(SLearner, OutcomeIndependentOfTreatment) {
  const auto gen = test::linear_data(shifted(0.0), 200, 3);
  const auto est = fit_s_learner(gen.data, ridge_base(1e-4));
  EXPECT_LT(est->predict_tau(test::random_matrix(20, 3, 4)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(SLearner, ExactShiftWithoutPenalty) {
  const auto gen = test::linear_data(shifted(2.0), 200, 3);
  const auto est = fit_s_learner(gen.data, ridge_base(0.0));
  const Vector tau = est->predict_tau(test::random_matrix(20, 3, 4));
  EXPECT_LT((tau.array() - 2.0).abs().maxCoeff(), 1e-8);
}

TEST(SLearner, ArmsDifferOnlyInTreatmentColumn) {
  const Matrix x = test::random_matrix(5, 2, 1);
  const Matrix x0 = with_treatment_column(x, 0.0);
  const Matrix x1 = with_treatment_column(x, 1.0);
  EXPECT_EQ(x0.leftCols(2), x1.leftCols(2));
  EXPECT_TRUE(x0.col(2).isZero());
  EXPECT_TRUE(x1.col(2).isOnes());
}

TEST(Estimators, EffectEqualsHeadDifference) {
  const auto gen = test::linear_data({Vector::Ones(2), Vector::Constant(2, 0.5), 1, 0, 0.2}, 120, 5);
  const Matrix x = test::random_matrix(1000, 2, 6);
  const NetConfig net = test::small_net(5);
  BaseConfig mlp;
  mlp.net = net;

  expect_heads_consistent(*fit_t_learner(gen.data, ridge_base(1.0)), x);
  expect_heads_consistent(*fit_t_learner(gen.data, mlp), x);
  expect_heads_consistent(*fit_s_learner(gen.data, ridge_base(1.0)), x);
  expect_heads_consistent(*fit_s_learner(gen.data, mlp), x);
  expect_heads_consistent(fit_tarnet(gen.data, net), x);
  expect_heads_consistent(fit_tarnet_wr(gen.data, net, {10.0}), x);
  expect_heads_consistent(fit_offsetnet(gen.data, net), x, 1e-12);

  HLearnerConfig h;
  h.base = mlp;
  h.stage1.outcome = OutcomeNuisance::TLearner;
  h.stage1.base = ridge_base(1.0);
  expect_heads_consistent(*fit_h_learner(gen.data, h), x);
  h.base = ridge_base(1.0);
  expect_heads_consistent(*fit_h_learner(gen.data, h), x, 1e-12);
}

TEST(Tarnet, ConstantOutcomesGiveNearZeroEffect) {
  auto gen = test::linear_data(shifted(0.0), 200, 7);
  gen.data.y.setConstant(1.5);
  const auto est = fit_tarnet(gen.data, test::small_net(200));
  EXPECT_LT(est.predict_tau(test::random_matrix(100, 3, 8)).cwiseAbs().mean(), 0.1);
}

TEST(Tarnet, CheckpointImprovesOnInitialFactualError) {
  const auto gen = test::linear_data(shifted(1.0), 200, 9);
  const auto val_gen = test::linear_data(shifted(1.0), 80, 10);
  const Validation val = factual_validation(val_gen.data);
  const auto est = fit_tarnet(gen.data, test::small_net(40), &val);
  ASSERT_FALSE(est.trace().val.empty());
  EXPECT_LT(est.trace().val[static_cast<std::size_t>(est.best_epoch())], est.trace().val.front());
}

TEST(TarnetWr, ZeroRhoMatchesTarnet) {
  const auto gen = test::linear_data(shifted(1.0), 150, 11);
  const auto a = fit_tarnet(gen.data, test::small_net(10));
  const auto b = fit_tarnet_wr(gen.data, test::small_net(10), {0.0});
  EXPECT_EQ(a.net().params().flatten(), b.net().params().flatten());
}

TEST(TarnetWr, EffectShrinksMonotonicallyInRho) {
  Vector b0(1), d(1);
  b0 << 1.0;
  d << 1.5;
  const auto gen = test::linear_data({b0, d, 0.5, 0.0, 0.1}, 300, 12);
  Matrix grid(41, 1);
  for (Index i = 0; i < grid.rows(); ++i) grid(i, 0) = -2.0 + 0.1 * static_cast<double>(i);
  double previous = std::numeric_limits<double>::infinity();
  for (double rho : {1.0, 1e2, 1e4, 1e6}) {
    const auto est = fit_tarnet_wr(gen.data, test::small_net(60), {rho});
    const double sup = est.predict_tau(grid).cwiseAbs().maxCoeff();
    EXPECT_LT(sup, previous) << "rho " << rho;
    previous = sup;
  }
  EXPECT_LT(previous, 0.05);
}

TEST(TarnetWr, NegativeRhoIsConfigError) {
  const auto gen = test::linear_data(shifted(1.0), 20, 1);
  EXPECT_THROW(fit_tarnet_wr(gen.data, test::small_net(1), {-1.0}), ConfigError);
}

TEST(OffsetNet, InitialEffectIsZero) {
  Rng rng(1);
  const TwoHeadNet net = TwoHeadNet::init(TwoHeadSpec{3, {8}, {8}, true}, rng);
  EXPECT_TRUE(net.forward(test::random_matrix(30, 3, 2)).tau.isZero());
}

TEST(OffsetNet, ConstantShiftRecovered) {
  const auto gen = test::linear_data(shifted(2.0), 400, 13);
  const auto est = fit_offsetnet(gen.data, test::small_net(100));
  EXPECT_NEAR(est.predict_tau(gen.data.x).mean(), 2.0, 0.3);
}

TEST(Direct, OracleXTargetsRecoverLinearEffect) {
  Vector b0(2), d(2);
  b0 << 0.5, 1.0;
  d << 2.0, -1.0;
  const test::LinearDgp g{b0, d, 0.7, 0.1, 0.0};
  const auto gen = test::linear_data(g, 200, 14);
  const auto oracle = NuisanceSet::oracle(
      nullptr, [g](const Matrix& x) { return Vector((x * g.b0).array() + g.intercept); },
      [g](const Matrix& x) { return Vector((x * (g.b0 + g.d)).array() + g.intercept + g.c); });
  const auto est = fit_direct(gen.data, PseudoKind::X, oracle, ridge_base(0.0));
  const auto& lin = dynamic_cast<const LinearEffectEstimator&>(*est).model();
  EXPECT_LT((lin.coef - d).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_NEAR(lin.intercept, 0.7, 1e-6);
}

TEST(Direct, IpwTargetsAreScaledOutcomesUnderHalfPropensity) {
  const auto gen = test::linear_data(shifted(1.0), 50, 15);
  const auto half = NuisanceSet::oracle(
      [](const Matrix& x) { return Vector::Constant(x.rows(), 0.5).eval(); }, nullptr, nullptr);
  const Vector p = construct_pseudo(PseudoKind::Ipw, gen.data, half).values;
  const Vector expected = (2.0 * gen.data.t.array() - 1.0) * 2.0 * gen.data.y.array();
  EXPECT_LT((p - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(HLoss, SingleSampleHandValue) {
  Vector f0(1), f1(1), t(1), y(1), p(1);
  f0 << 0.5;
  f1 << 2.0;
  t << 1;
  y << 1;
  p << 1;
  EXPECT_DOUBLE_EQ(h_loss(f0, f1, t, y, p, 0.5).total, 0.625);
}

TEST(HLoss, EndpointsAndConvexCombination) {
  const Vector f0 = test::random_matrix(20, 1, 1).col(0);
  const Vector f1 = test::random_matrix(20, 1, 2).col(0);
  const Vector y = test::random_matrix(20, 1, 3).col(0);
  const Vector p = test::random_matrix(20, 1, 4).col(0);
  Vector t(20);
  for (Index i = 0; i < 20; ++i) t[i] = static_cast<double>(i % 3 == 0);
  double factual = 0.0, direct = 0.0;
  for (Index i = 0; i < 20; ++i) {
    const double f = t[i] > 0.5 ? f1[i] : f0[i];
    factual += (y[i] - f) * (y[i] - f) / 20.0;
    direct += (f1[i] - f0[i] - p[i]) * (f1[i] - f0[i] - p[i]) / 20.0;
  }
  EXPECT_NEAR(h_loss(f0, f1, t, y, p, 0.0).total, factual, 1e-15);
  EXPECT_NEAR(h_loss(f0, f1, t, y, p, 1.0).total, direct, 1e-15);
  const auto half = h_loss(f0, f1, t, y, p, 0.5);
  EXPECT_NEAR(half.total, 0.5 * half.indirect + 0.5 * half.direct, 1e-12);
  EXPECT_NEAR(half.indirect, factual, 1e-12);
  EXPECT_NEAR(half.direct, direct, 1e-12);
}

struct LinearHFixture : ::testing::Test {
  GeneratedData gen;
  Vector pseudo;
  const double gamma = 0.8;

  void SetUp() override {
    Vector b0(4), d(4);
    b0 << 1.0, -1.0, 0.5, 0.0;
    d << 0.3, 0.0, -0.7, 1.2;
    gen = test::linear_data({b0, d, 0.5, 0.2, 0.5}, 300, 21);
    const auto nuis = fit_nuisances(gen.data, [] {
      NuisanceConfig c;
      c.outcome = OutcomeNuisance::TLearner;
      c.base.kind = BaseLearner::Ridge;
      return c;
    }());
    pseudo = construct_pseudo(PseudoKind::X, gen.data, nuis).values;
  }
};

TEST_F(LinearHFixture, LambdaZeroIsRidgeTLearner) {
  const auto h = solve_linear_h(gen.data, pseudo, 0.0, {gamma, true});
  const auto t = fit_t_learner(gen.data, ridge_base(gamma));
  const auto& tl = dynamic_cast<const LinearTwoModelEstimator&>(*t);
  EXPECT_LT((h.model0().coef - tl.model0().coef).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((h.model1().coef - tl.model1().coef).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(h.model0().intercept, tl.model0().intercept, 1e-8);
  EXPECT_NEAR(h.model1().intercept, tl.model1().intercept, 1e-8);
}

TEST_F(LinearHFixture, LambdaOneIsHalfPenaltyDirectRidge) {
  const auto h = solve_linear_h(gen.data, pseudo, 1.0, {gamma, true});
  const auto direct = fit_ridge(gen.data.x, pseudo, {gamma / 2.0, true});
  const auto effect = h.effect_model();
  EXPECT_LT((effect.coef - direct.coef).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(effect.intercept, direct.intercept, 1e-8);
}

TEST_F(LinearHFixture, SolutionContinuousInLambda) {
  for (double lambda : {0.0, 0.3, 0.7, 1.0 - 1e-6}) {
    const auto a = solve_linear_h(gen.data, pseudo, lambda, {gamma, true});
    const auto b = solve_linear_h(gen.data, pseudo, lambda + 1e-6, {gamma, true});
    EXPECT_LT((a.model0().coef - b.model0().coef).cwiseAbs().maxCoeff(), 1e-3);
    EXPECT_LT((a.model1().coef - b.model1().coef).cwiseAbs().maxCoeff(), 1e-3);
    EXPECT_LT((a.effect_model().coef - b.effect_model().coef).cwiseAbs().maxCoeff(), 1e-3);
  }
}

TEST_F(LinearHFixture, RidgeBaseUsesClosedForm) {
  HLearnerConfig cfg;
  cfg.lambda = 0.4;
  cfg.base = ridge_base(gamma);
  const auto est = fit_h_learner_on_pseudo(gen.data, pseudo, cfg);
  const auto direct = solve_linear_h(gen.data, pseudo, 0.4, {gamma, true});
  const Matrix x = test::random_matrix(30, 4, 3);
  EXPECT_LT((est->predict_tau(x) - direct.predict_tau(x)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(HLearner, LambdaOutsideUnitIntervalIsConfigError) {
  const auto gen = test::linear_data(shifted(1.0), 30, 1);
  HLearnerConfig cfg;
  cfg.base = ridge_base(1.0);
  for (double lambda : {-0.1, 1.1}) {
    cfg.lambda = lambda;
    EXPECT_THROW(fit_h_learner(gen.data, cfg), ConfigError);
    EXPECT_THROW(solve_linear_h(gen.data, Vector::Zero(30), lambda, {}), ConfigError);
  }
}

TEST(HLearner, ZeroPseudoShrinksHeadGap) {
  Vector b0(1), d(1);
  b0 << 1.0;
  d << 2.0;
  const auto gen = test::linear_data({b0, d, 1.0, 0.0, 0.3}, 300, 31);
  HLearnerConfig cfg;
  cfg.zero_pseudo = true;
  cfg.base.net = test::small_net(60, 5);
  cfg.lambda = 0.0;
  const double gap0 = fit_h_learner(gen.data, cfg)->predict_tau(gen.data.x).cwiseAbs().mean();
  cfg.lambda = 0.5;
  const double gap_half = fit_h_learner(gen.data, cfg)->predict_tau(gen.data.x).cwiseAbs().mean();
  EXPECT_LT(gap_half, gap0);
}

TEST(HLearner, SampleSplitTrainsOnHalf) {
  const auto gen = test::linear_data(shifted(1.0), 100, 2);
  HLearnerConfig cfg;
  cfg.base = ridge_base(1.0);
  cfg.stage1.outcome = OutcomeNuisance::TLearner;
  cfg.stage1.base = ridge_base(1.0);
  cfg.sample_split = true;
  cfg.split_seed = 9;
  const auto a = fit_h_learner(gen.data, cfg);
  const auto b = fit_h_learner(gen.data, cfg);
  const Matrix x = test::random_matrix(10, 3, 1);
  EXPECT_EQ(a->predict_tau(x), b->predict_tau(x));
}

}  // namespace
}  // namespace cate

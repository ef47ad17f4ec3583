#include <gtest/gtest.h>

#include <filesystem>

#include "helpers.hpp"

namespace cate {
namespace {

FittedModel with_stats(EstimatorPtr est, const ObservationalDataset& data) {
  return {std::move(est), fit_standardization(data, true)};
}

void expect_round_trip(const FittedModel& model, const Matrix& x) {
  const FittedModel back = model_from_json(model_to_json(model));
  EXPECT_EQ(back.estimator->kind(), model.estimator->kind());
  EXPECT_EQ(back.predict_tau(x), model.predict_tau(x)) << model.estimator->kind();
  if (model.estimator->has_outcome_heads()) {
    const Matrix z = model.stats.apply(x);
    EXPECT_EQ(back.estimator->predict_mu0(z), model.estimator->predict_mu0(z));
  }
}

TEST(Serialize, EveryEstimatorRoundTrips) {
  const auto gen = test::linear_data({Vector::Ones(2), Vector::Constant(2, 0.5), 1, 0, 0.2}, 80, 3);
  const Matrix x = test::random_matrix(25, 2, 4, 3.0);
  BaseConfig ridge;
  ridge.kind = BaseLearner::Ridge;
  BaseConfig mlp;
  mlp.net = test::small_net(3);
  const auto oracle = NuisanceSet::oracle(
      [](const Matrix& z) { return Vector::Constant(z.rows(), 0.5).eval(); },
      [](const Matrix& z) { return Vector(z.col(0)); },
      [](const Matrix& z) { return Vector(z.col(1)); });

  expect_round_trip(with_stats(fit_t_learner(gen.data, ridge), gen.data), x);
  expect_round_trip(with_stats(fit_t_learner(gen.data, mlp), gen.data), x);
  expect_round_trip(with_stats(fit_s_learner(gen.data, ridge), gen.data), x);
  expect_round_trip(with_stats(fit_s_learner(gen.data, mlp), gen.data), x);
  expect_round_trip(
      with_stats(std::make_shared<TwoHeadEstimator>(fit_offsetnet(gen.data, mlp.net)), gen.data),
      x);
  expect_round_trip(with_stats(fit_direct(gen.data, PseudoKind::Dr, oracle, ridge), gen.data), x);
  expect_round_trip(with_stats(fit_direct(gen.data, PseudoKind::X, oracle, mlp), gen.data), x);
}

TEST(Serialize, FileRoundTripAndUnscaledEffects) {
  const auto gen = test::linear_data({Vector::Ones(1), Vector::Ones(1), 2, 0, 0}, 60, 5);
  BaseConfig ridge;
  ridge.kind = BaseLearner::Ridge;
  ridge.ridge.l2 = 0.0;
  const auto stats = fit_standardization(gen.data, true);
  const auto z = apply_standardization(gen.data, stats);
  const FittedModel model{fit_t_learner(z, ridge), stats};
  const auto path = std::filesystem::temp_directory_path() / "cate_tests_model.json";
  save_model(path, model);
  const FittedModel back = load_model(path);
  EXPECT_EQ(back.predict_tau(gen.data.x), model.predict_tau(gen.data.x));
  EXPECT_LT((back.predict_tau(gen.data.x) - gen.truth.tau).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Serialize, RejectsMalformedDocuments) {
  EXPECT_THROW(model_from_json("{"), Error);
  EXPECT_THROW(model_from_json(R"({"spec_version": 999})"), Error);
  EXPECT_THROW(load_model("/nonexistent/model.json"), IoError);
}

}  // namespace
}  // namespace cate

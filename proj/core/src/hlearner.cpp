#include <numeric>
#include <string>

#include "cate/error.hpp"
#include "cate/metalearners.hpp"
#include "cate/random.hpp"
#include "detail.hpp"

namespace cate {

void HLearnerConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("h-learner: lambda must lie in [0, 1], got " + std::to_string(lambda));
  }
  stage1.validate();
}

HLoss h_loss(const Vector& f0, const Vector& f1, const Vector& t, const Vector& y,
             const Vector& pseudo, double lambda, Vector* d_f0, Vector* d_f1) {
  const Index n = f0.size();
  if (f1.size() != n || t.size() != n || y.size() != n || pseudo.size() != n) {
    throw DimensionError("h-loss: input lengths differ");
  }
  HLoss loss;
  if (n == 0) return loss;
  const double inv_n = 1.0 / static_cast<double>(n);
  if (d_f0) d_f0->setZero(n);
  if (d_f1) d_f1->setZero(n);
  for (Index i = 0; i < n; ++i) {
    const bool treated = t[i] > 0.5;
    const double r_ind = (treated ? f1[i] : f0[i]) - y[i];
    const double r_dir = f1[i] - f0[i] - pseudo[i];
    loss.indirect += r_ind * r_ind;
    loss.direct += r_dir * r_dir;
    if (d_f0 && d_f1) {
      const double g_ind = 2.0 * (1.0 - lambda) * inv_n * r_ind;
      const double g_dir = 2.0 * lambda * inv_n * r_dir;
      (treated ? (*d_f1)[i] : (*d_f0)[i]) += g_ind;
      (*d_f1)[i] += g_dir;
      (*d_f0)[i] -= g_dir;
    }
  }
  loss.indirect *= inv_n;
  loss.direct *= inv_n;
  loss.total = (1.0 - lambda) * loss.indirect + lambda * loss.direct;
  return loss;
}

LinearTwoModelEstimator solve_linear_h(const ObservationalDataset& data, const Vector& pseudo,
                                       double lambda, const RidgeConfig& ridge) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("h-learner: lambda must lie in [0, 1]");
  if (pseudo.size() != data.size()) throw DimensionError("h-learner: pseudo-outcome length mismatch");
  if (!(ridge.l2 >= 0.0)) throw ConfigError("h-learner: l2 must be nonnegative");

  const Index d = data.dim();
  const Index off = ridge.fit_intercept ? 1 : 0;
  const Index q = d + off;
  Matrix a = Matrix::Zero(2 * q, 2 * q);
  Vector b = Vector::Zero(2 * q);
  Vector z(q);
  for (Index i = 0; i < data.size(); ++i) {
    if (off) z[0] = 1.0;
    z.tail(d) = data.x.row(i).transpose();
    const Matrix zz = z * z.transpose();
    const Index arm = data.t[i] > 0.5 ? 1 : 0;
    a.block(arm * q, arm * q, q, q) += (1.0 - lambda) * zz;
    b.segment(arm * q, q) += (1.0 - lambda) * data.y[i] * z;
    if (lambda > 0.0) {
      a.block(0, 0, q, q) += lambda * zz;
      a.block(q, q, q, q) += lambda * zz;
      a.block(0, q, q, q) -= lambda * zz;
      a.block(q, 0, q, q) -= lambda * zz;
      b.segment(0, q) -= lambda * pseudo[i] * z;
      b.segment(q, q) += lambda * pseudo[i] * z;
    }
  }
  for (Index arm = 0; arm < 2; ++arm) {
    a.diagonal().segment(arm * q + off, d).array() += ridge.l2;
  }

  bool singular = false;
  const Vector theta = solve_normal_equations(a, b, &singular);
  LinearModel m0, m1;
  m0.intercept = off ? theta[0] : 0.0;
  m0.coef = theta.segment(off, d);
  m1.intercept = off ? theta[q] : 0.0;
  m1.coef = theta.segment(q + off, d);
  m0.pseudo_solution = m1.pseudo_solution = singular;
  return LinearTwoModelEstimator("h_learner", std::move(m0), std::move(m1));
}

EstimatorPtr fit_h_learner_on_pseudo(const ObservationalDataset& data, const Vector& pseudo,
                                     const HLearnerConfig& cfg, const Validation* val) {
  cfg.validate();
  const Index treated = data.treated_count();
  if (cfg.lambda < 1.0 && (treated == 0 || treated == data.size())) {
    throw PositivityError("h-learner: both treatment arms must be nonempty");
  }
  if (cfg.base.kind == BaseLearner::Ridge) {
    return std::make_shared<LinearTwoModelEstimator>(
        solve_linear_h(data, pseudo, cfg.lambda, cfg.base.ridge));
  }
  Rng rng(derive_seed(cfg.base.net.train.seed, detail::kInitStream));
  TwoHeadNet net = TwoHeadNet::init(cfg.base.net.two_head(data.dim()), rng);
  detail::TwoHeadObjective objective;
  objective.pseudo = &pseudo;
  objective.lambda = cfg.lambda;
  auto fit = detail::train_two_head(net, data, objective, cfg.base.net.train, val);
  return std::make_shared<TwoHeadEstimator>("h_learner", std::move(net), std::move(fit));
}

EstimatorPtr fit_h_learner(const ObservationalDataset& data, const HLearnerConfig& cfg,
                           const NuisanceSet* nuisances, const Validation* val) {
  cfg.validate();
  if (cfg.zero_pseudo) {
    return fit_h_learner_on_pseudo(data, Vector::Zero(data.size()), cfg, val);
  }

  const ObservationalDataset* stage2 = &data;
  ObservationalDataset first_half, second_half;
  if (cfg.sample_split) {
    if (data.size() < 4) throw ValidationError("h-learner: too few rows to split");
    std::vector<Index> perm(static_cast<std::size_t>(data.size()));
    std::iota(perm.begin(), perm.end(), Index{0});
    Rng rng(cfg.split_seed);
    for (std::size_t i = perm.size() - 1; i > 0; --i) {
      std::swap(perm[i], perm[static_cast<std::size_t>(rng() % (i + 1))]);
    }
    const auto half = perm.size() / 2;
    first_half = data.rows(std::span<const Index>(perm).subspan(0, half));
    second_half = data.rows(std::span<const Index>(perm).subspan(half));
    stage2 = &second_half;
  }

  NuisanceSet fitted;
  if (!nuisances) {
    fitted = fit_nuisances(cfg.sample_split ? first_half : data, cfg.stage1);
    nuisances = &fitted;
  }
  const auto pseudo = construct_pseudo(cfg.pseudo, *stage2, *nuisances);
  return fit_h_learner_on_pseudo(*stage2, pseudo.values, cfg, val);
}

}  // namespace cate

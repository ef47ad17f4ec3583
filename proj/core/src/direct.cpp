#include <string>

#include "cate/error.hpp"
#include "cate/metalearners.hpp"
#include "cate/random.hpp"
#include "detail.hpp"

namespace cate {

EstimatorPtr fit_effect_regression(const Matrix& x, const Vector& targets, const BaseConfig& base,
                                   std::string kind, const Validation* val) {
  if (x.rows() != targets.size()) throw DimensionError("direct: x and targets row counts differ");
  if (x.rows() < 1) throw ValidationError("direct: empty dataset");
  if (base.kind == BaseLearner::Ridge) {
    return std::make_shared<LinearEffectEstimator>(std::move(kind), fit_ridge(x, targets, base.ridge));
  }
  const MlpSpec spec = base.net.single_network(x.cols());
  Rng rng(derive_seed(base.net.train.seed, detail::kInitStream));
  std::function<double(const ParameterSet&)> score;
  if (val && val->score && !val->needs_outcome_heads) {
    score = [&](const ParameterSet& p) {
      const Vector tau = mlp_forward(p.layers, val->data.x, false).col(0);
      return val->score(Vector(), Vector(), tau);
    };
  }
  auto fit = detail::train_regression(init_layers(spec, rng), x, targets, base.net.train, score);
  ParameterSet params = fit.params;
  return std::make_shared<MlpEffectEstimator>(std::move(kind), spec, std::move(params),
                                              std::move(fit));
}

EstimatorPtr fit_direct(const ObservationalDataset& data, PseudoKind kind,
                        const NuisanceSet& nuisances, const BaseConfig& base,
                        const Validation* val) {
  const auto pseudo = construct_pseudo(kind, data, nuisances);
  return fit_effect_regression(data.x, pseudo.values, base,
                               "direct_" + std::string(to_string(kind)), val);
}

}  // namespace cate

#include <string>

#include "cate/error.hpp"
#include "cate/metalearners.hpp"
#include "cate/random.hpp"
#include "detail.hpp"

namespace cate {

MlpSpec NetConfig::single_network(Index input_dim) const {
  MlpSpec spec;
  spec.input_dim = input_dim;
  spec.hidden = trunk;
  spec.hidden.insert(spec.hidden.end(), head.begin(), head.end());
  spec.output_dim = 1;
  return spec;
}

TwoHeadSpec NetConfig::two_head(Index input_dim, bool offset) const {
  return TwoHeadSpec{input_dim, trunk, head, offset};
}

NetConfig NetConfig::paper_scale() {
  NetConfig cfg;
  cfg.trunk = {200, 200, 200};
  cfg.head = {100, 100};
  cfg.train.epochs = 1000;
  cfg.train.batch_size = 100;
  return cfg;
}

std::string_view to_string(BaseLearner base) noexcept {
  return base == BaseLearner::Ridge ? "ridge" : "mlp";
}

BaseLearner parse_base_learner(std::string_view name) {
  if (name == "ridge" || name == "linear") return BaseLearner::Ridge;
  if (name == "mlp" || name == "nn") return BaseLearner::Mlp;
  throw ConfigError("unknown base learner '" + std::string(name) + "'");
}

namespace detail {

Matrix gather_rows(const Matrix& x, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = x.row(rows[r]);
  return out;
}

Vector gather(const Vector& v, std::span<const Index> rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) out[static_cast<Index>(r)] = v[rows[r]];
  return out;
}

TrainConfig stream_config(const TrainConfig& cfg, std::uint64_t stream) {
  TrainConfig out = cfg;
  out.seed = derive_seed(cfg.seed, stream);
  return out;
}

TrainResult train_two_head(TwoHeadNet& net, const ObservationalDataset& data,
                           const TwoHeadObjective& objective, const TrainConfig& cfg,
                           const Validation* val) {
  const Vector zeros = Vector::Zero(data.size());
  const Vector& pseudo = objective.pseudo ? *objective.pseudo : zeros;
  if (pseudo.size() != data.size()) throw DimensionError("two-head: pseudo-outcome length mismatch");

  Objective obj;
  obj.rows = data.size();
  obj.batch = [&](const ParameterSet& p, std::span<const Index> rows, ParameterSet* grad) {
    const Matrix xb = gather_rows(data.x, rows);
    const Vector tb = gather(data.t, rows);
    const Vector yb = gather(data.y, rows);
    const Vector pb = gather(pseudo, rows);
    TwoHeadNet::Cache cache;
    const auto out = net.forward(p, xb, grad ? &cache : nullptr);
    Vector d0, d1;
    const HLoss loss = h_loss(out.f0, out.f1, tb, yb, pb, objective.lambda,
                              grad ? &d0 : nullptr, grad ? &d1 : nullptr);
    double total = loss.total;
    if (grad) net.backward(p, cache, d0, d1, *grad);
    if (objective.rho > 0.0) {
      total += objective.rho * head_weight_gap(net, p, objective.rho, grad);
    }
    return total;
  };
  if (val && val->score) {
    obj.validation = [&](const ParameterSet& p) {
      const auto out = net.forward(p, val->data.x);
      return val->score(out.f0, out.f1, out.tau);
    };
  }
  TrainResult fit = train(net.params(), obj, stream_config(cfg, kShuffleStream));
  net.params() = fit.params;
  return fit;
}

TrainResult train_regression(std::vector<Layer> init, const Matrix& x, const Vector& target,
                             const TrainConfig& cfg,
                             std::function<double(const ParameterSet&)> validation) {
  Objective obj;
  obj.rows = x.rows();
  obj.batch = [&](const ParameterSet& p, std::span<const Index> rows, ParameterSet* grad) {
    const Matrix xb = gather_rows(x, rows);
    const Vector yb = gather(target, rows);
    ForwardCache cache;
    const Matrix pred = mlp_forward(p.layers, xb, false, grad ? &cache : nullptr);
    const Vector resid = pred.col(0) - yb;
    const double n = static_cast<double>(rows.size());
    if (grad) {
      const Matrix d = (2.0 / n) * resid;
      mlp_backward(p.layers, cache, d, false, grad->layers);
    }
    return resid.squaredNorm() / n;
  };
  obj.validation = std::move(validation);
  return train(ParameterSet{std::move(init)}, obj, stream_config(cfg, kShuffleStream));
}

}  // namespace detail

namespace {

void require_both_arms(const ObservationalDataset& data, const char* who) {
  const Index treated = data.treated_count();
  if (treated == 0 || treated == data.size()) {
    throw PositivityError(std::string(who) + ": both treatment arms must be nonempty");
  }
}

double factual_mse(const Vector& pred, const Vector& y) {
  return (pred - y).squaredNorm() / static_cast<double>(std::max<Index>(y.size(), 1));
}

}  // namespace

EstimatorPtr fit_t_learner(const ObservationalDataset& data, const BaseConfig& base,
                           const Validation* val) {
  require_both_arms(data, "t-learner");
  const auto d0 = arm_subset(data, 0);
  const auto d1 = arm_subset(data, 1);
  if (base.kind == BaseLearner::Ridge) {
    return std::make_shared<LinearTwoModelEstimator>("t_learner", fit_ridge(d0.x, d0.y, base.ridge),
                                                     fit_ridge(d1.x, d1.y, base.ridge));
  }

  const TwoHeadSpec spec{data.dim(), {}, base.net.single_network(data.dim()).hidden, false};
  const MlpSpec arm_spec = base.net.single_network(data.dim());
  Rng rng(derive_seed(base.net.train.seed, detail::kInitStream));
  ParameterSet combined;
  for (int arm = 0; arm < 2; ++arm) {
    const auto& arm_data = arm == 0 ? d0 : d1;
    std::function<double(const ParameterSet&)> score;
    std::optional<ObservationalDataset> arm_val;
    if (val && val->data.size() > 0) {
      arm_val = arm_subset(val->data, arm);
      if (arm_val->size() == 0) arm_val.reset();
    }
    if (arm_val) {
      score = [&arm_val](const ParameterSet& p) {
        return factual_mse(mlp_forward(p.layers, arm_val->x, false).col(0), arm_val->y);
      };
    }
    TrainConfig cfg = base.net.train;
    cfg.seed = derive_seed(cfg.seed, 100 + static_cast<std::uint64_t>(arm));
    auto fit = detail::train_regression(init_layers(arm_spec, rng), arm_data.x, arm_data.y, cfg,
                                        score);
    for (auto& l : fit.params.layers) combined.layers.push_back(std::move(l));
  }
  return std::make_shared<TwoHeadEstimator>("t_learner", TwoHeadNet(spec, std::move(combined)));
}

EstimatorPtr fit_s_learner(const ObservationalDataset& data, const BaseConfig& base,
                           const Validation* val) {
  if (data.size() < 1) throw ValidationError("s-learner: empty dataset");
  const Matrix z = with_treatment_column(data.x, data.t);
  if (base.kind == BaseLearner::Ridge) {
    return std::make_shared<LinearSLearnerEstimator>(fit_ridge(z, data.y, base.ridge));
  }
  const MlpSpec spec = base.net.single_network(data.dim() + 1);
  Rng rng(derive_seed(base.net.train.seed, detail::kInitStream));
  std::function<double(const ParameterSet&)> score;
  if (val && val->score) {
    score = [&](const ParameterSet& p) {
      const MlpSLearnerEstimator probe(spec, p);
      const Vector m0 = probe.predict_mu0(val->data.x);
      const Vector m1 = probe.predict_mu1(val->data.x);
      return val->score(m0, m1, m1 - m0);
    };
  }
  auto fit = detail::train_regression(init_layers(spec, rng), z, data.y, base.net.train, score);
  ParameterSet params = fit.params;
  return std::make_shared<MlpSLearnerEstimator>(spec, std::move(params), std::move(fit));
}

namespace {

TwoHeadEstimator fit_two_head(const char* kind, const ObservationalDataset& data,
                              const NetConfig& net, bool offset, double rho,
                              const Validation* val) {
  require_both_arms(data, kind);
  Rng rng(derive_seed(net.train.seed, detail::kInitStream));
  TwoHeadNet model = TwoHeadNet::init(net.two_head(data.dim(), offset), rng);
  detail::TwoHeadObjective objective;
  objective.rho = rho;
  auto fit = detail::train_two_head(model, data, objective, net.train, val);
  return TwoHeadEstimator(kind, std::move(model), std::move(fit));
}

}  // namespace

TwoHeadEstimator fit_tarnet(const ObservationalDataset& data, const NetConfig& net,
                            const Validation* val) {
  return fit_two_head("tarnet", data, net, false, 0.0, val);
}

TwoHeadEstimator fit_tarnet_wr(const ObservationalDataset& data, const NetConfig& net,
                               const WeightRegConfig& wr, const Validation* val) {
  if (!(wr.rho >= 0.0)) throw ConfigError("tarnet-wr: rho must be nonnegative");
  return fit_two_head("tarnet_wr", data, net, false, wr.rho, val);
}

TwoHeadEstimator fit_offsetnet(const ObservationalDataset& data, const NetConfig& net,
                               const Validation* val) {
  return fit_two_head("offsetnet", data, net, true, 0.0, val);
}

}  // namespace cate

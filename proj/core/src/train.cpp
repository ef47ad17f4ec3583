#include "cate/train.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <string>

#include "cate/error.hpp"
#include "cate/random.hpp"

namespace cate {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(learning_rate >= 0.0)) throw ConfigError("train: learning_rate must be >= 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("train: weight_decay must be >= 0");
}

double cosine_learning_rate(const TrainConfig& cfg, int epoch) {
  if (cfg.epochs <= 1) return cfg.learning_rate;
  const double progress = static_cast<double>(epoch) / static_cast<double>(cfg.epochs - 1);
  return 0.5 * cfg.learning_rate * (1.0 + std::cos(std::numbers::pi * progress));
}

namespace {

struct AdamState {
  ParameterSet m;
  ParameterSet v;
  long step = 0;
};

void adamw_step(ParameterSet& params, const ParameterSet& grad, AdamState& state,
                const TrainConfig& cfg, double lr) {
  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  const double decay = 1.0 - lr * cfg.weight_decay;
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseAbs2();
    p *= decay;
    p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps);
  };
  for (std::size_t k = 0; k < params.layers.size(); ++k) {
    update(params.layers[k].weight, grad.layers[k].weight, state.m.layers[k].weight,
           state.v.layers[k].weight);
    update(params.layers[k].bias, grad.layers[k].bias, state.m.layers[k].bias,
           state.v.layers[k].bias);
  }
}

}  // namespace

TrainResult train(ParameterSet init, const Objective& objective, const TrainConfig& cfg) {
  cfg.validate();
  if (objective.rows < 1) throw ValidationError("train: no training rows");
  if (!objective.batch) throw ConfigError("train: objective has no batch loss");

  ParameterSet params = std::move(init);
  ParameterSet grad = params.zeros_like();
  AdamState state{params.zeros_like(), params.zeros_like(), 0};

  std::vector<Index> order(static_cast<std::size_t>(objective.rows));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(cfg.seed);

  TrainResult result;
  double best = std::numeric_limits<double>::infinity();
  const bool has_val = static_cast<bool>(objective.validation);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
      std::swap(order[i], order[j]);
    }
    const double lr = cosine_learning_rate(cfg, epoch);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t len =
          std::min(order.size() - start, static_cast<std::size_t>(cfg.batch_size));
      const std::span<const Index> batch(order.data() + start, len);
      grad.set_zero();
      const double loss = objective.batch(params, batch, &grad);
      if (!std::isfinite(loss)) {
        throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch), epoch);
      }
      epoch_loss += loss * static_cast<double>(len);
      adamw_step(params, grad, state, cfg, lr);
    }
    epoch_loss /= static_cast<double>(order.size());
    result.trace.train.push_back(epoch_loss);

    if (has_val) {
      const double val = objective.validation(params);
      if (!std::isfinite(val)) {
        throw DivergenceError("train: non-finite validation loss at epoch " + std::to_string(epoch),
                              epoch);
      }
      result.trace.val.push_back(val);
      if (val < best) {
        best = val;
        result.best_epoch = epoch;
        result.params = params;
      }
    }
  }
  if (!has_val) {
    result.params = std::move(params);
    result.best_epoch = cfg.epochs - 1;
  }
  return result;
}

void write_trace_csv(const std::filesystem::path& path, const LossTrace& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("trace: cannot write " + path.string());
  out.precision(17);
  out << "epoch,train_loss,val_loss\n";
  for (std::size_t e = 0; e < trace.train.size(); ++e) {
    out << e << ',' << trace.train[e] << ',';
    if (e < trace.val.size()) out << trace.val[e];
    out << '\n';
  }
}

}  // namespace cate

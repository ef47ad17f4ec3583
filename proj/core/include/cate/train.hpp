#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "cate/mlp.hpp"
#include "cate/types.hpp"

namespace cate {

struct TrainConfig {
  int epochs = 200;
  Index batch_size = 100;
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

// Cosine annealing from learning_rate at epoch 0 to zero at the final epoch.
double cosine_learning_rate(const TrainConfig& cfg, int epoch);

// A differentiable training objective over `rows` examples.
//
// `batch` returns the loss of the given rows and, when `grad` is non-null,
// accumulates its gradient into *grad (zeroed by the caller). `validation`,
// when set, scores a parameter set for checkpoint selection; lower is better.
struct Objective {
  Index rows = 0;
  std::function<double(const ParameterSet&, std::span<const Index>, ParameterSet*)> batch;
  std::function<double(const ParameterSet&)> validation;
};

struct LossTrace {
  std::vector<double> train;
  std::vector<double> val;  // empty when the objective has no validation score
};

struct TrainResult {
  ParameterSet params;  // parameters at best_epoch
  LossTrace trace;
  int best_epoch = -1;
};

// Mini-batch AdamW with decoupled weight decay and a per-epoch cosine
// schedule. Rows are reshuffled every epoch from cfg.seed. When a validation
// score is available the returned parameters are those of the epoch with the
// lowest score (earliest epoch on ties); otherwise the final parameters.
// Throws DivergenceError on a non-finite loss.
TrainResult train(ParameterSet init, const Objective& objective, const TrainConfig& cfg);

// Writes "epoch,train_loss,val_loss" rows.
void write_trace_csv(const std::filesystem::path& path, const LossTrace& trace);

}  // namespace cate

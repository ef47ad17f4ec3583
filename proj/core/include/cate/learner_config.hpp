#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "cate/data.hpp"
#include "cate/mlp.hpp"
#include "cate/ridge.hpp"
#include "cate/train.hpp"
#include "cate/two_head.hpp"

namespace cate {

// Network shape shared by every neural learner. Two-head models use
// trunk + head; single-network learners stack the same widths.
struct NetConfig {
  std::vector<Index> trunk{32, 32};
  std::vector<Index> head{32};
  TrainConfig train;

  MlpSpec single_network(Index input_dim) const;
  TwoHeadSpec two_head(Index input_dim, bool offset = false) const;

  // Representation 3x200 with 2x100 heads, 1000 epochs.
  static NetConfig paper_scale();
};

enum class BaseLearner { Ridge, Mlp };

std::string_view to_string(BaseLearner base) noexcept;
BaseLearner parse_base_learner(std::string_view name);

struct BaseConfig {
  BaseLearner kind = BaseLearner::Mlp;
  RidgeConfig ridge;
  NetConfig net;
};

// Held-out rows plus a checkpoint criterion. score() receives predictions on
// data.x; mu0/mu1 are empty for learners without outcome heads. Lower is
// better.
struct Validation {
  ObservationalDataset data;
  std::function<double(const Vector& mu0, const Vector& mu1, const Vector& tau)> score;
  bool needs_outcome_heads = false;
};

struct WeightRegConfig {
  double rho = 1.0;
};

}  // namespace cate

#pragma once

#include <functional>

#include "cate/data.hpp"
#include "cate/learner_config.hpp"
#include "cate/train.hpp"
#include "cate/two_head.hpp"

namespace cate::detail {

inline constexpr std::uint64_t kInitStream = 0x11;
inline constexpr std::uint64_t kShuffleStream = 0x22;

Matrix gather_rows(const Matrix& x, std::span<const Index> rows);
Vector gather(const Vector& v, std::span<const Index> rows);

struct TwoHeadObjective {
  const Vector* pseudo = nullptr;  // null: direct term uses zeros
  double lambda = 0.0;
  double rho = 0.0;  // head weight-gap penalty
};

// Trains `net` in place on the stage-2 style loss and returns the fit record.
TrainResult train_two_head(TwoHeadNet& net, const ObservationalDataset& data,
                           const TwoHeadObjective& objective, const TrainConfig& cfg,
                           const Validation* val);

// Squared-error regression of target on x with a single network.
TrainResult train_regression(std::vector<Layer> init, const Matrix& x, const Vector& target,
                             const TrainConfig& cfg,
                             std::function<double(const ParameterSet&)> validation);

TrainConfig stream_config(const TrainConfig& cfg, std::uint64_t stream);

}  // namespace cate::detail

#pragma once

#include <Eigen/Dense>

namespace cate {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr int kSpecVersion = 1;

}  // namespace cate

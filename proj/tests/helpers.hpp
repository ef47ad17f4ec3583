#pragma once

#include <random>

#include "cate/cate.hpp"

namespace cate::test {

// y = x b0 + t * (x d + c) + noise, x ~ N(0, 1).
struct LinearDgp {
  Vector b0;
  Vector d;
  double c = 0.0;
  double intercept = 0.0;
  double noise = 0.0;
};

inline GeneratedData linear_data(const LinearDgp& g, Index n, std::uint64_t seed, double p = 0.5) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Index dim = g.b0.size();
  Matrix x(n, dim);
  Vector t(n), y(n), mu0(n), mu1(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < dim; ++j) x(i, j) = normal(rng);
    t[i] = u(rng) < p ? 1.0 : 0.0;
    mu0[i] = g.intercept + x.row(i).dot(g.b0);
    mu1[i] = mu0[i] + x.row(i).dot(g.d) + g.c;
    y[i] = (t[i] > 0.5 ? mu1[i] : mu0[i]) + g.noise * normal(rng);
  }
  return {ObservationalDataset::make(std::move(x), std::move(t), std::move(y)),
          GroundTruth::from_potential_outcomes(std::move(mu0), std::move(mu1))};
}

inline NetConfig small_net(int epochs = 60, std::uint64_t seed = 1) {
  NetConfig net;
  net.trunk = {16};
  net.head = {16};
  net.train.epochs = epochs;
  net.train.batch_size = 32;
  net.train.learning_rate = 1e-2;
  net.train.seed = seed;
  return net;
}

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

}  // namespace cate::test

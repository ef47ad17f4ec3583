#include <benchmark/benchmark.h>

#include <random>

#include "cate/cate.hpp"

namespace {

using namespace cate;

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

void BM_MlpForward(benchmark::State& state) {
  const Index batch = state.range(0);
  const Index width = state.range(1);
  MlpSpec spec{25, {width, width}, 1, false};
  Rng rng(1);
  const auto layers = init_layers(spec, rng);
  const Matrix x = random_matrix(batch, 25, 2);
  for (auto _ : state) benchmark::DoNotOptimize(mlp_forward(layers, x, false));
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_MlpForward)->Args({100, 32})->Args({100, 200})->Args({1000, 32});

void BM_MlpForwardBackward(benchmark::State& state) {
  const Index batch = state.range(0);
  const Index width = state.range(1);
  MlpSpec spec{25, {width, width}, 1, false};
  Rng rng(1);
  ParameterSet p{init_layers(spec, rng)};
  ParameterSet g = p.zeros_like();
  const Matrix x = random_matrix(batch, 25, 2);
  const Matrix y = random_matrix(batch, 1, 3);
  ForwardCache cache;
  for (auto _ : state) {
    const Matrix out = mlp_forward(p.layers, x, false, &cache);
    g.set_zero();
    benchmark::DoNotOptimize(mlp_backward(p.layers, cache, out - y, false, g.layers));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_MlpForwardBackward)->Args({100, 32})->Args({100, 200})->Args({1000, 32});

void BM_TwoHeadStep(benchmark::State& state) {
  const Index batch = state.range(0);
  Rng rng(1);
  const TwoHeadNet net = TwoHeadNet::init(TwoHeadSpec{25, {32, 32}, {32}, false}, rng);
  ParameterSet g = net.params().zeros_like();
  const Matrix x = random_matrix(batch, 25, 2);
  const Vector y = random_matrix(batch, 1, 3).col(0);
  const Vector pseudo = random_matrix(batch, 1, 4).col(0);
  Vector t(batch);
  for (Index i = 0; i < batch; ++i) t[i] = static_cast<double>(i % 2);
  TwoHeadNet::Cache cache;
  Vector d0, d1;
  for (auto _ : state) {
    const auto out = net.forward(net.params(), x, &cache);
    h_loss(out.f0, out.f1, t, y, pseudo, 0.5, &d0, &d1);
    g.set_zero();
    net.backward(net.params(), cache, d0, d1, g);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_TwoHeadStep)->Arg(100)->Arg(1000);

void BM_HLoss(benchmark::State& state) {
  const Index n = state.range(0);
  const Vector f0 = random_matrix(n, 1, 1).col(0);
  const Vector f1 = random_matrix(n, 1, 2).col(0);
  const Vector y = random_matrix(n, 1, 3).col(0);
  const Vector pseudo = random_matrix(n, 1, 4).col(0);
  Vector t(n);
  for (Index i = 0; i < n; ++i) t[i] = static_cast<double>(i % 2);
  Vector d0, d1;
  for (auto _ : state) benchmark::DoNotOptimize(h_loss(f0, f1, t, y, pseudo, 0.5, &d0, &d1));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_HLoss)->Arg(100)->Arg(10000);

void BM_Ridge(benchmark::State& state) {
  const Index n = state.range(0);
  const Index d = state.range(1);
  const Matrix x = random_matrix(n, d, 1);
  const Vector y = random_matrix(n, 1, 2).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(fit_ridge(x, y, {1.0, true}));
}
BENCHMARK(BM_Ridge)->Args({747, 25})->Args({10000, 25});

void BM_LinearH(benchmark::State& state) {
  const Index n = state.range(0);
  const Matrix x = random_matrix(n, 25, 1);
  Vector t(n);
  for (Index i = 0; i < n; ++i) t[i] = static_cast<double>(i % 2);
  const auto data = ObservationalDataset::make(x, t, random_matrix(n, 1, 2).col(0));
  const Vector pseudo = random_matrix(n, 1, 3).col(0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_linear_h(data, pseudo, 0.5, {1.0, true}));
}
BENCHMARK(BM_LinearH)->Arg(747)->Arg(10000);

void BM_GenerateSemiSynthetic(benchmark::State& state) {
  SemiSyntheticConfig cfg;
  cfg.alpha = 0.4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_semi_synthetic(cfg));
    ++cfg.seed;
  }
}
BENCHMARK(BM_GenerateSemiSynthetic);

}  // namespace
BENCHMARK_MAIN();

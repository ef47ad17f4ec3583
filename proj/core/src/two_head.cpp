#include "cate/two_head.hpp"

#include "cate/error.hpp"

namespace cate {

void TwoHeadSpec::validate() const {
  if (input_dim < 1) throw ConfigError("two-head: input_dim must be >= 1");
  for (const auto w : trunk) {
    if (w < 1) throw ConfigError("two-head: trunk widths must be >= 1");
  }
  for (const auto w : head) {
    if (w < 1) throw ConfigError("two-head: head widths must be >= 1");
  }
}

TwoHeadNet::TwoHeadNet(TwoHeadSpec spec, ParameterSet params)
    : spec_(std::move(spec)), params_(std::move(params)) {
  spec_.validate();
  if (params_.layers.size() != spec_.trunk_layers() + 2 * spec_.head_layers()) {
    throw DimensionError("two-head: parameter layer count does not match spec");
  }
}

TwoHeadNet TwoHeadNet::init(const TwoHeadSpec& spec, Rng& rng) {
  spec.validate();
  ParameterSet p;
  if (!spec.trunk.empty()) {
    MlpSpec trunk{spec.input_dim,
                  std::vector<Index>(spec.trunk.begin(), spec.trunk.end() - 1),
                  spec.trunk.back(), true};
    p.layers = init_layers(trunk, rng);
  }
  const MlpSpec head{spec.representation_dim(), spec.head, 1, false};
  for (int h = 0; h < 2; ++h) {
    auto layers = init_layers(head, rng);
    if (spec.offset && h == 1) {
      layers.back().weight.setZero();
      layers.back().bias.setZero();
    }
    for (auto& l : layers) p.layers.push_back(std::move(l));
  }
  return TwoHeadNet(spec, std::move(p));
}

std::span<const Layer> TwoHeadNet::trunk(const ParameterSet& p) const {
  return std::span<const Layer>(p.layers).subspan(0, spec_.trunk_layers());
}

std::span<const Layer> TwoHeadNet::head0(const ParameterSet& p) const {
  return std::span<const Layer>(p.layers).subspan(spec_.trunk_layers(), spec_.head_layers());
}

std::span<const Layer> TwoHeadNet::head1(const ParameterSet& p) const {
  return std::span<const Layer>(p.layers)
      .subspan(spec_.trunk_layers() + spec_.head_layers(), spec_.head_layers());
}

TwoHeadOutput TwoHeadNet::forward(const ParameterSet& params, const Matrix& x, Cache* cache) const {
  if (x.cols() != spec_.input_dim) {
    throw DimensionError("two-head: input has " + std::to_string(x.cols()) +
                         " columns, expected " + std::to_string(spec_.input_dim));
  }
  const Matrix rep = mlp_forward(trunk(params), x, true, cache ? &cache->trunk : nullptr);
  const Matrix h0 = mlp_forward(head0(params), rep, false, cache ? &cache->head0 : nullptr);
  const Matrix h1 = mlp_forward(head1(params), rep, false, cache ? &cache->head1 : nullptr);
  TwoHeadOutput out;
  out.f0 = h0.col(0);
  if (spec_.offset) {
    out.tau = h1.col(0);
    out.f1 = out.f0 + out.tau;
  } else {
    out.f1 = h1.col(0);
    out.tau = out.f1 - out.f0;
  }
  return out;
}

void TwoHeadNet::backward(const ParameterSet& params, const Cache& cache, const Vector& d_f0,
                          const Vector& d_f1, ParameterSet& grad) const {
  const std::size_t t = spec_.trunk_layers();
  const std::size_t h = spec_.head_layers();
  std::span<Layer> g(grad.layers);
  // Offset mode: f0 = h0, f1 = h0 + h1.
  const Vector d_h0 = spec_.offset ? Vector(d_f0 + d_f1) : d_f0;
  const Matrix d_rep0 = mlp_backward(head0(params), cache.head0, d_h0, false, g.subspan(t, h));
  const Matrix d_rep1 = mlp_backward(head1(params), cache.head1, d_f1, false, g.subspan(t + h, h));
  if (t > 0) {
    const Matrix d_rep = d_rep0 + d_rep1;
    mlp_backward(trunk(params), cache.trunk, d_rep, true, g.subspan(0, t));
  }
}

double head_weight_gap(const TwoHeadNet& net, const ParameterSet& params, double rho,
                       ParameterSet* grad) {
  const std::size_t t = net.spec().trunk_layers();
  const std::size_t h = net.spec().head_layers();
  double gap = 0.0;
  for (std::size_t k = 0; k < h; ++k) {
    const Layer& a = params.layers[t + k];
    const Layer& b = params.layers[t + h + k];
    const Matrix dw = a.weight - b.weight;
    const Vector db = a.bias - b.bias;
    gap += dw.squaredNorm() + db.squaredNorm();
    if (grad) {
      grad->layers[t + k].weight += 2.0 * rho * dw;
      grad->layers[t + k].bias += 2.0 * rho * db;
      grad->layers[t + h + k].weight -= 2.0 * rho * dw;
      grad->layers[t + h + k].bias -= 2.0 * rho * db;
    }
  }
  return gap;
}

}  // namespace cate

#include "cate/mlp.hpp"

#include <cmath>
#include <string>

#include "cate/error.hpp"

namespace cate {

std::size_t ParameterSet::num_scalars() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  out.layers.reserve(layers.size());
  for (const auto& l : layers) {
    out.layers.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
  }
  return out;
}

void ParameterSet::set_zero() {
  for (auto& l : layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
}

void ParameterSet::axpy(double alpha, const ParameterSet& other) {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    layers[k].weight += alpha * other.layers[k].weight;
    layers[k].bias += alpha * other.layers[k].bias;
  }
}

void ParameterSet::scale(double alpha) {
  for (auto& l : layers) {
    l.weight *= alpha;
    l.bias *= alpha;
  }
}

double ParameterSet::squared_norm() const {
  double s = 0.0;
  for (const auto& l : layers) s += l.weight.squaredNorm() + l.bias.squaredNorm();
  return s;
}

bool ParameterSet::same_shape(const ParameterSet& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& a = layers[k];
    const auto& b = other.layers[k];
    if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols() ||
        a.bias.size() != b.bias.size()) {
      return false;
    }
  }
  return true;
}

Vector ParameterSet::flatten() const {
  Vector flat(static_cast<Index>(num_scalars()));
  Index pos = 0;
  for (const auto& l : layers) {
    for (Index r = 0; r < l.weight.rows(); ++r) {
      for (Index c = 0; c < l.weight.cols(); ++c) flat[pos++] = l.weight(r, c);
    }
    for (Index r = 0; r < l.bias.size(); ++r) flat[pos++] = l.bias[r];
  }
  return flat;
}

void ParameterSet::assign_flat(const Vector& flat) {
  if (static_cast<std::size_t>(flat.size()) != num_scalars()) {
    throw DimensionError("parameter set: flat vector has wrong length");
  }
  Index pos = 0;
  for (auto& l : layers) {
    for (Index r = 0; r < l.weight.rows(); ++r) {
      for (Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = flat[pos++];
    }
    for (Index r = 0; r < l.bias.size(); ++r) l.bias[r] = flat[pos++];
  }
}

void MlpSpec::validate() const {
  if (input_dim < 1 || output_dim < 1) throw ConfigError("mlp: dimensions must be >= 1");
  for (const auto w : hidden) {
    if (w < 1) throw ConfigError("mlp: hidden widths must be >= 1");
  }
}

double elu(double z) noexcept { return z > 0.0 ? z : std::expm1(z); }

double elu_grad(double z) noexcept { return z > 0.0 ? 1.0 : std::exp(z); }

std::vector<Layer> init_layers(const MlpSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<Layer> layers;
  layers.reserve(spec.num_layers());
  Index fan_in = spec.input_dim;
  auto add = [&](Index fan_out) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Layer l{Matrix(fan_out, fan_in), Vector::Zero(fan_out)};
    for (Index r = 0; r < fan_out; ++r) {
      for (Index c = 0; c < fan_in; ++c) l.weight(r, c) = u(rng);
    }
    layers.push_back(std::move(l));
    fan_in = fan_out;
  };
  for (const auto w : spec.hidden) add(w);
  add(spec.output_dim);
  return layers;
}

namespace {

Matrix apply_elu(const Matrix& z) {
  return z.unaryExpr([](double v) { return elu(v); });
}

}  // namespace

Matrix mlp_forward(std::span<const Layer> layers, const Matrix& x, bool activate_output,
                   ForwardCache* cache) {
  if (layers.empty()) {
    if (cache) *cache = ForwardCache{x, {}, {}};
    return x;
  }
  if (x.cols() != layers.front().weight.cols()) {
    throw DimensionError("mlp: input has " + std::to_string(x.cols()) + " columns, expected " +
                         std::to_string(layers.front().weight.cols()));
  }
  if (cache) {
    cache->input = x;
    cache->pre.clear();
    cache->post.clear();
  }
  Matrix h = x;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    Matrix z = h * l.weight.transpose();
    z.rowwise() += l.bias.transpose();
    const bool activate = k + 1 < layers.size() || activate_output;
    Matrix a = activate ? apply_elu(z) : z;
    if (cache) {
      cache->pre.push_back(std::move(z));
      cache->post.push_back(a);
    }
    h = std::move(a);
  }
  return h;
}

Matrix mlp_backward(std::span<const Layer> layers, const ForwardCache& cache,
                    const Matrix& grad_output, bool activate_output, std::span<Layer> grads) {
  if (layers.empty()) return grad_output;
  if (cache.pre.size() != layers.size()) throw DimensionError("mlp: stale forward cache");
  Matrix delta = grad_output;
  for (std::size_t k = layers.size(); k-- > 0;) {
    const bool activate = k + 1 < layers.size() || activate_output;
    if (activate) {
      // elu'(z) = elu(z) + 1 for z <= 0
      delta.array() *= (cache.pre[k].array() > 0.0)
                           .select(1.0, cache.post[k].array() + 1.0);
    }
    const Matrix& input = k == 0 ? cache.input : cache.post[k - 1];
    grads[k].weight.noalias() += delta.transpose() * input;
    grads[k].bias.noalias() += delta.colwise().sum().transpose();
    delta = delta * layers[k].weight;
  }
  return delta;
}

}  // namespace cate

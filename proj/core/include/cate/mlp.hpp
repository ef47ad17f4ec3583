#pragma once

#include <span>
#include <vector>

#include "cate/random.hpp"
#include "cate/types.hpp"

namespace cate {

// Dense layer acting on row-major batches: out = in * weight^T + bias^T.
struct Layer {
  Matrix weight;  // out x in
  Vector bias;    // out
};

// Flat list of layers. Models made of several networks (trunk + heads) own
// one ParameterSet and address their pieces by layer ranges, so the optimizer
// only ever sees this type.
struct ParameterSet {
  std::vector<Layer> layers;

  std::size_t num_scalars() const;
  ParameterSet zeros_like() const;
  void set_zero();
  // this += alpha * other
  void axpy(double alpha, const ParameterSet& other);
  void scale(double alpha);
  double squared_norm() const;
  bool same_shape(const ParameterSet& other) const;

  // Copies every scalar into a vector / back (weights row by row, then bias).
  Vector flatten() const;
  void assign_flat(const Vector& flat);
};

// Feed-forward network shape. Hidden layers use ELU; the output layer is the
// identity unless activate_output is set (representation trunks).
struct MlpSpec {
  Index input_dim = 1;
  std::vector<Index> hidden{32, 32};
  Index output_dim = 1;
  bool activate_output = false;

  std::size_t num_layers() const { return hidden.size() + 1; }
  void validate() const;
};

double elu(double z) noexcept;
double elu_grad(double z) noexcept;

// Uniform fan-in initialization U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero bias.
std::vector<Layer> init_layers(const MlpSpec& spec, Rng& rng);

struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;   // pre-activation per layer
  std::vector<Matrix> post;  // post-activation per layer
};

// Forward pass through a contiguous run of layers. The cache, when given, is
// filled for mlp_backward.
Matrix mlp_forward(std::span<const Layer> layers, const Matrix& x, bool activate_output,
                   ForwardCache* cache = nullptr);

// Reverse pass. Accumulates dLoss/dparams into `grads` (same layout as
// `layers`) and returns dLoss/dinput.
Matrix mlp_backward(std::span<const Layer> layers, const ForwardCache& cache,
                    const Matrix& grad_output, bool activate_output, std::span<Layer> grads);

}  // namespace cate

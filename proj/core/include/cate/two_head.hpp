#pragma once

#include <span>
#include <vector>

#include "cate/mlp.hpp"
#include "cate/types.hpp"

namespace cate {

// Shared representation trunk feeding two scalar heads.
//
// Standard mode: f0 = head0(phi(x)), f1 = head1(phi(x)).
// Offset mode:   head0 is mu0 and head1 is the effect, so f1 = f0 + head1.
// An empty trunk gives two independent networks on the raw features.
struct TwoHeadSpec {
  Index input_dim = 1;
  std::vector<Index> trunk{32, 32};
  std::vector<Index> head{32};
  bool offset = false;

  void validate() const;
  Index representation_dim() const { return trunk.empty() ? input_dim : trunk.back(); }
  std::size_t trunk_layers() const { return trunk.size(); }
  std::size_t head_layers() const { return head.size() + 1; }
};

struct TwoHeadOutput {
  Vector f0;
  Vector f1;
  Vector tau;  // f1 - f0, or the offset head directly
};

class TwoHeadNet {
 public:
  TwoHeadNet() = default;
  TwoHeadNet(TwoHeadSpec spec, ParameterSet params);

  // Fresh network. In offset mode the effect head's output layer starts at
  // zero so the initial effect is identically zero.
  static TwoHeadNet init(const TwoHeadSpec& spec, Rng& rng);

  struct Cache {
    ForwardCache trunk;
    ForwardCache head0;
    ForwardCache head1;
  };

  TwoHeadOutput forward(const ParameterSet& params, const Matrix& x, Cache* cache = nullptr) const;
  TwoHeadOutput forward(const Matrix& x) const { return forward(params_, x); }

  // Accumulates gradients given dLoss/df0 and dLoss/df1 (per row).
  void backward(const ParameterSet& params, const Cache& cache, const Vector& d_f0,
                const Vector& d_f1, ParameterSet& grad) const;

  std::span<const Layer> trunk(const ParameterSet& p) const;
  std::span<const Layer> head0(const ParameterSet& p) const;
  std::span<const Layer> head1(const ParameterSet& p) const;

  const TwoHeadSpec& spec() const noexcept { return spec_; }
  const ParameterSet& params() const noexcept { return params_; }
  ParameterSet& params() noexcept { return params_; }

 private:
  TwoHeadSpec spec_;
  ParameterSet params_;
};

// Sum of squared differences between corresponding head0/head1 weights and
// biases. Accumulates rho * d/dparams into grad when non-null.
double head_weight_gap(const TwoHeadNet& net, const ParameterSet& params, double rho = 1.0,
                       ParameterSet* grad = nullptr);

}  // namespace cate

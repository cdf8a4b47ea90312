#pragma once

#include <string>
#include <vector>

#include <betacfg/rng.hpp>
#include <betacfg/types.hpp>

namespace betacfg {

enum class Activation { Silu, Tanh };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct Layer {
  Matrix W;  // out x in
  Vector b;
};

// Dense feed-forward network, affine-then-activation on every layer except
// the last, which stays affine. Batches are column-major: one sample per
// column. Single-threaded and deterministic; a trained net is immutable and
// freely shareable.
struct Mlp {
  std::vector<Layer> layers;
  Activation activation = Activation::Silu;

  Index in_dim() const { return layers.front().W.cols(); }
  Index out_dim() const { return layers.back().W.rows(); }
  std::vector<int> dims() const;
  Index parameter_count() const;
};

// dims = {in, hidden..., out}; weights ~ N(0, 2/fan_in), biases zero.
Mlp make_mlp(const std::vector<int>& dims, Activation act, Rng& rng);

Matrix forward(const Mlp& net, const Matrix& X);

// Intermediates kept for the backward pass: act[0] is the input, act[i] the
// post-activation output of layer i-1, pre[i] the pre-activation of layer i.
struct ForwardTrace {
  std::vector<Matrix> pre;
  std::vector<Matrix> act;
  Matrix out;
};

ForwardTrace forward_trace(const Mlp& net, const Matrix& X);

struct MlpGrads {
  std::vector<Layer> layers;  // same shapes as the network
  Matrix input;               // d loss / d X
};

// Exact reverse-mode gradients of `forward` for the given upstream
// d loss / d out. Weight gradients are summed over the batch.
MlpGrads backward(const Mlp& net, const ForwardTrace& trace,
                  const Matrix& upstream);

}  // namespace betacfg

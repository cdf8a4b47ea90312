#pragma once

#include <string>
#include <vector>

#include <betacfg/mlp.hpp>
#include <betacfg/types.hpp>

namespace betacfg {

// Named view over a flat parameter (or gradient) buffer. The name is only
// used for diagnostics when a gradient turns non-finite.
struct TensorRef {
  std::string name;
  double* data = nullptr;
  Index size = 0;
};

std::vector<TensorRef> parameter_refs(Mlp& net, const std::string& prefix);
std::vector<TensorRef> parameter_refs(MlpGrads& grads,
                                      const std::string& prefix);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adaptive-moment update with bias correction:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
//   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
// Deterministic given the gradient sequence.
class Adam {
 public:
  Adam(AdamConfig cfg, const std::vector<TensorRef>& params);

  void step(const std::vector<TensorRef>& params,
            const std::vector<TensorRef>& grads);

  long step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::vector<Array> m_;
  std::vector<Array> v_;
};

}  // namespace betacfg

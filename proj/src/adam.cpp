#include <betacfg/adam.hpp>

#include <cmath>

namespace betacfg {

std::vector<TensorRef> parameter_refs(Mlp& net, const std::string& prefix) {
  std::vector<TensorRef> refs;
  for (size_t i = 0; i < net.layers.size(); ++i) {
    const std::string base = prefix + ".L" + std::to_string(i);
    refs.push_back({base + ".W", net.layers[i].W.data(),
                    net.layers[i].W.size()});
    refs.push_back({base + ".b", net.layers[i].b.data(),
                    net.layers[i].b.size()});
  }
  return refs;
}

std::vector<TensorRef> parameter_refs(MlpGrads& grads,
                                      const std::string& prefix) {
  std::vector<TensorRef> refs;
  for (size_t i = 0; i < grads.layers.size(); ++i) {
    const std::string base = prefix + ".L" + std::to_string(i);
    refs.push_back({base + ".W", grads.layers[i].W.data(),
                    grads.layers[i].W.size()});
    refs.push_back({base + ".b", grads.layers[i].b.data(),
                    grads.layers[i].b.size()});
  }
  return refs;
}

Adam::Adam(AdamConfig cfg, const std::vector<TensorRef>& params) : cfg_(cfg) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const TensorRef& p : params) {
    m_.push_back(Array::Zero(p.size));
    v_.push_back(Array::Zero(p.size));
  }
}

void Adam::step(const std::vector<TensorRef>& params,
                const std::vector<TensorRef>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw std::invalid_argument("optimizer state does not match parameters");

  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, double(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, double(t_));

  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i].size != grads[i].size ||
        params[i].size != Index(m_[i].size()))
      throw std::invalid_argument("gradient shape mismatch for " +
                                  grads[i].name);
    Eigen::Map<Array> p(params[i].data, params[i].size);
    Eigen::Map<const Array> g(grads[i].data, grads[i].size);
    if (!g.isFinite().all())
      throw DataError("non-finite gradient in " + grads[i].name);

    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.square();
    p -= cfg_.lr * (m_[i] / bc1) / ((v_[i] / bc2).sqrt() + cfg_.eps);
  }
}

}  // namespace betacfg

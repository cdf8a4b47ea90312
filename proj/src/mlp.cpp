#include <betacfg/mlp.hpp>

#include <cmath>

namespace betacfg {

std::string activation_name(Activation a) {
  return a == Activation::Silu ? "silu" : "tanh";
}

Activation activation_from_name(const std::string& name) {
  if (name == "silu") return Activation::Silu;
  if (name == "tanh") return Activation::Tanh;
  throw ConfigError("unknown activation '" + name + "'");
}

std::vector<int> Mlp::dims() const {
  std::vector<int> d;
  d.push_back(int(layers.front().W.cols()));
  for (const Layer& l : layers) d.push_back(int(l.W.rows()));
  return d;
}

Index Mlp::parameter_count() const {
  Index n = 0;
  for (const Layer& l : layers) n += l.W.size() + l.b.size();
  return n;
}

Mlp make_mlp(const std::vector<int>& dims, Activation act, Rng& rng) {
  if (dims.size() < 2) throw ConfigError("mlp needs at least two dimensions");
  for (int d : dims)
    if (d < 1) throw ConfigError("mlp layer dimensions must be positive");

  Mlp net;
  net.activation = act;
  net.layers.resize(dims.size() - 1);
  for (size_t i = 0; i + 1 < dims.size(); ++i) {
    const int fan_in = dims[i];
    const double scale = std::sqrt(2.0 / fan_in);
    Layer& l = net.layers[i];
    l.W = scale * rng.normal_matrix(dims[i + 1], dims[i]);
    l.b = Vector::Zero(dims[i + 1]);
  }
  return net;
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Matrix apply_activation(Activation act, const Matrix& Z) {
  if (act == Activation::Silu)
    return Z.unaryExpr([](double z) { return z * sigmoid(z); });
  return Z.array().tanh().matrix();
}

Matrix activation_derivative(Activation act, const Matrix& Z) {
  if (act == Activation::Silu)
    return Z.unaryExpr([](double z) {
      const double s = sigmoid(z);
      return s * (1.0 + z * (1.0 - s));
    });
  return Z.unaryExpr([](double z) {
    const double t = std::tanh(z);
    return 1.0 - t * t;
  });
}

}  // namespace

Matrix forward(const Mlp& net, const Matrix& X) {
  if (X.rows() != net.in_dim())
    throw std::invalid_argument("input has " + std::to_string(X.rows()) +
                                " rows, network expects " +
                                std::to_string(net.in_dim()));
  Matrix A = X;
  const size_t L = net.layers.size();
  for (size_t i = 0; i + 1 < L; ++i) {
    Matrix Z = (net.layers[i].W * A).colwise() + net.layers[i].b;
    A = apply_activation(net.activation, Z);
  }
  return (net.layers.back().W * A).colwise() + net.layers.back().b;
}

ForwardTrace forward_trace(const Mlp& net, const Matrix& X) {
  if (X.rows() != net.in_dim())
    throw std::invalid_argument("input has " + std::to_string(X.rows()) +
                                " rows, network expects " +
                                std::to_string(net.in_dim()));
  ForwardTrace t;
  const size_t L = net.layers.size();
  t.act.reserve(L);
  t.pre.reserve(L - 1);
  t.act.push_back(X);
  for (size_t i = 0; i + 1 < L; ++i) {
    t.pre.push_back((net.layers[i].W * t.act.back()).colwise() +
                    net.layers[i].b);
    t.act.push_back(apply_activation(net.activation, t.pre.back()));
  }
  t.out = (net.layers.back().W * t.act.back()).colwise() + net.layers.back().b;
  return t;
}

MlpGrads backward(const Mlp& net, const ForwardTrace& trace,
                  const Matrix& upstream) {
  if (upstream.rows() != net.out_dim() ||
      upstream.cols() != trace.out.cols())
    throw std::invalid_argument("upstream gradient shape mismatch");

  const size_t L = net.layers.size();
  MlpGrads g;
  g.layers.resize(L);

  Matrix delta = upstream;  // d loss / d pre-activation of current layer
  for (size_t i = L; i-- > 0;) {
    g.layers[i].W = delta * trace.act[i].transpose();
    g.layers[i].b = delta.rowwise().sum();
    Matrix back = net.layers[i].W.transpose() * delta;
    if (i == 0) {
      g.input = std::move(back);
    } else {
      delta = back.cwiseProduct(
          activation_derivative(net.activation, trace.pre[i - 1]));
    }
  }
  return g;
}

}  // namespace betacfg

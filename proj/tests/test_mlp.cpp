#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <betacfg/adam.hpp>
#include <betacfg/mlp.hpp>
#include <betacfg/rng.hpp>

using namespace betacfg;

namespace {

// independent scalar-loop reimplementation of the forward map
std::vector<double> naive_forward(const Mlp& net,
                                  const std::vector<double>& x) {
  std::vector<double> a = x;
  for (size_t li = 0; li < net.layers.size(); ++li) {
    const Layer& l = net.layers[li];
    std::vector<double> z(size_t(l.W.rows()), 0.0);
    for (Index i = 0; i < l.W.rows(); ++i) {
      double acc = l.b[i];
      for (Index j = 0; j < l.W.cols(); ++j) acc += l.W(i, j) * a[size_t(j)];
      z[size_t(i)] = acc;
    }
    if (li + 1 < net.layers.size())
      for (double& v : z) v = v / (1.0 + std::exp(-v));  // silu
    a = std::move(z);
  }
  return a;
}

// scalar loss used for finite-difference probes
double probe_loss(const Mlp& net, const Matrix& X, const Vector& proj) {
  return (proj.transpose() * forward(net, X)).sum();
}

}  // namespace

TEST_CASE("forward zero network") {
  Mlp net;
  net.layers = {{Matrix::Zero(3, 2), Vector::Zero(3)},
                {Matrix::Zero(2, 3), Vector::Zero(2)}};
  const Matrix out = forward(net, Matrix::Random(2, 5));
  CHECK(out.isZero(0.0));
}

TEST_CASE("forward identity single layer") {
  Mlp net;
  net.layers = {{Matrix::Identity(3, 3), Vector::Zero(3)}};
  const Matrix X = Matrix::Random(3, 4);
  CHECK((forward(net, X) - X).norm() == 0.0);
}

TEST_CASE("forward matches an independent reimplementation") {
  Rng rng(0);
  const Mlp net = make_mlp({4, 8, 8, 3}, Activation::Silu, rng);
  Matrix X(4, 1);
  X << 0.3, -1.1, 0.8, 2.0;
  const Matrix out = forward(net, X);
  const std::vector<double> expect =
      naive_forward(net, {0.3, -1.1, 0.8, 2.0});
  for (int i = 0; i < 3; ++i)
    CHECK(out(i, 0) == doctest::Approx(expect[size_t(i)]).epsilon(1e-14));
}

TEST_CASE("forward rejects wrong input dimension") {
  Rng rng(1);
  const Mlp net = make_mlp({4, 3}, Activation::Silu, rng);
  CHECK_THROWS_AS(forward(net, Matrix::Zero(5, 1)), std::invalid_argument);
}

TEST_CASE("make_mlp is deterministic under the seed") {
  Rng a(42), b(42);
  const Mlp na = make_mlp({3, 16, 2}, Activation::Silu, a);
  const Mlp nb = make_mlp({3, 16, 2}, Activation::Silu, b);
  for (size_t i = 0; i < na.layers.size(); ++i)
    CHECK((na.layers[i].W - nb.layers[i].W).norm() == 0.0);
}

TEST_CASE("backward closed form for a single linear layer") {
  Mlp net;
  Matrix W(2, 3);
  W << 1, 2, 3, 4, 5, 6;
  net.layers = {{W, Vector::Zero(2)}};
  Matrix X(3, 1);
  X << 0.5, -1.0, 2.0;
  Matrix G(2, 1);
  G << 1.0, -2.0;

  const ForwardTrace trace = forward_trace(net, X);
  const MlpGrads g = backward(net, trace, G);

  CHECK((g.layers[0].W - G * X.transpose()).norm() == 0.0);
  CHECK((g.layers[0].b - G.col(0)).norm() == 0.0);
  CHECK((g.input - W.transpose() * G).norm() == 0.0);
}

TEST_CASE("zero upstream gives zero gradients") {
  Rng rng(5);
  const Mlp net = make_mlp({3, 8, 2}, Activation::Silu, rng);
  const Matrix X = rng.normal_matrix(3, 4);
  const MlpGrads g =
      backward(net, forward_trace(net, X), Matrix::Zero(2, 4));
  for (const Layer& l : g.layers) {
    CHECK(l.W.isZero(0.0));
    CHECK(l.b.isZero(0.0));
  }
  CHECK(g.input.isZero(0.0));
}

TEST_CASE("gradients match central finite differences") {
  Rng rng(2024);
  const double h = 1e-5;
  for (int probe = 0; probe < 20; ++probe) {
    const int in = 2 + int(rng.uniform_int(4));
    const int hid = 3 + int(rng.uniform_int(6));
    const int out = 1 + int(rng.uniform_int(3));
    Mlp net = make_mlp({in, hid, hid, out},
                       probe % 2 ? Activation::Tanh : Activation::Silu, rng);
    const Matrix X = rng.normal_matrix(in, 2);
    const Vector proj = rng.normal_vector(out);

    const ForwardTrace trace = forward_trace(net, X);
    Matrix upstream(out, X.cols());
    upstream.colwise() = proj;
    const MlpGrads g = backward(net, trace, upstream);

    auto check_grad = [&](double analytic, double* slot) {
      const double saved = *slot;
      *slot = saved + h;
      const double up = probe_loss(net, X, proj);
      *slot = saved - h;
      const double dn = probe_loss(net, X, proj);
      *slot = saved;
      const double fd = (up - dn) / (2.0 * h);
      CHECK(std::abs(analytic - fd) <=
            1e-4 * std::max({std::abs(fd), std::abs(analytic), 1e-8 / 1e-4}));
    };

    for (size_t li = 0; li < net.layers.size(); ++li) {
      for (Index k = 0; k < net.layers[li].W.size(); ++k)
        check_grad(g.layers[li].W.data()[k], net.layers[li].W.data() + k);
      for (Index k = 0; k < net.layers[li].b.size(); ++k)
        check_grad(g.layers[li].b.data()[k], net.layers[li].b.data() + k);
    }

    // input gradients through the same scalar loss
    Matrix Xp = X;
    for (Index k = 0; k < X.size(); ++k) {
      const double saved = Xp.data()[k];
      Xp.data()[k] = saved + h;
      const double up = probe_loss(net, Xp, proj);
      Xp.data()[k] = saved - h;
      const double dn = probe_loss(net, Xp, proj);
      Xp.data()[k] = saved;
      const double fd = (up - dn) / (2.0 * h);
      CHECK(std::abs(g.input.data()[k] - fd) <=
            1e-4 * std::max({std::abs(fd), std::abs(g.input.data()[k]),
                             1e-8 / 1e-4}));
    }
  }
}

TEST_CASE("adam leaves parameters alone under zero gradients") {
  Matrix p = Matrix::Constant(2, 2, 1.5);
  Matrix g = Matrix::Zero(2, 2);
  std::vector<TensorRef> params{{"p", p.data(), p.size()}};
  std::vector<TensorRef> grads{{"p", g.data(), g.size()}};
  Adam opt(AdamConfig{}, params);
  opt.step(params, grads);
  CHECK((p.array() == 1.5).all());
}

TEST_CASE("adam single step matches the hand-evaluated update") {
  Matrix p = Matrix::Zero(1, 1);
  Matrix g = Matrix::Constant(1, 1, 1.0);
  std::vector<TensorRef> params{{"p", p.data(), p.size()}};
  std::vector<TensorRef> grads{{"p", g.data(), g.size()}};
  AdamConfig cfg;
  cfg.lr = 0.1;
  Adam opt(cfg, params);
  opt.step(params, grads);

  // independent scalar evaluation of the same rule
  const double m = 0.1 * 1.0;
  const double v = 0.001 * 1.0;
  const double mhat = m / (1.0 - 0.9);
  const double vhat = v / (1.0 - 0.999);
  const double expect = 0.0 - 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
  CHECK(p(0, 0) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(p(0, 0) == doctest::Approx(-0.09999999900000001).epsilon(1e-9));
}

TEST_CASE("adam drives a convex quadratic down") {
  Matrix w(3, 1);
  w << 4.0, -3.0, 2.0;
  std::vector<TensorRef> params{{"w", w.data(), w.size()}};
  AdamConfig cfg;
  cfg.lr = 0.05;
  Adam opt(cfg, params);

  // monotone decrease after warm-up, until numerical convergence
  double prev = w.squaredNorm();
  for (int step = 1; step <= 400; ++step) {
    Matrix g = 2.0 * w;
    std::vector<TensorRef> grads{{"w", g.data(), g.size()}};
    opt.step(params, grads);
    const double loss = w.squaredNorm();
    if (step > 10 && prev > 1e-6) CHECK(loss < prev);
    prev = loss;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("adam reports the offending tensor on non-finite gradients") {
  Matrix p = Matrix::Zero(1, 1);
  Matrix g = Matrix::Constant(1, 1, std::nan(""));
  std::vector<TensorRef> params{{"weights.L0", p.data(), p.size()}};
  std::vector<TensorRef> grads{{"weights.L0", g.data(), g.size()}};
  Adam opt(AdamConfig{}, params);
  CHECK_THROWS_WITH_AS(opt.step(params, grads),
                       doctest::Contains("weights.L0"), DataError);
}

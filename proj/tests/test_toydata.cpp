#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <betacfg/rng.hpp>
#include <betacfg/toydata.hpp>

using namespace betacfg;

TEST_CASE("bezier endpoints and tangents") {
  const BranchCurve c{{0, 0}, {1, 2}, {3, 1}};
  CHECK((bezier_point(c, 0.0) - c.p0).norm() == 0.0);
  CHECK((bezier_point(c, 1.0) - c.p2).norm() == 0.0);
  CHECK((bezier_tangent(c, 0.0) - 2.0 * (c.p1 - c.p0)).norm() == 0.0);
}

TEST_CASE("generation is deterministic under the seed") {
  ToySpec spec = default_toy_spec();
  spec.n_per_class = 200;
  spec.seed = 42;
  const LabeledSet a = generate(spec);
  const LabeledSet b = generate(spec);
  CHECK((a.points.array() == b.points.array()).all());
  CHECK(a.labels == b.labels);

  spec.seed = 43;
  const LabeledSet c = generate(spec);
  CHECK((a.points - c.points).norm() > 0.0);
}

TEST_CASE("zero jitter puts every point on its branch curve") {
  ToySpec spec = default_toy_spec();
  spec.n_per_class = 100;
  spec.sigma_across = 0.0;
  Matrix pts;
  std::vector<int> labels;
  generate_raw(spec, 1, pts, labels);
  for (Index j = 0; j < pts.cols(); ++j)
    CHECK(membership_distance(pts.col(j), spec, labels[size_t(j)], 20000) <
          1e-3);
}

TEST_CASE("standardization is exact") {
  ToySpec spec = default_toy_spec();
  spec.n_per_class = 5000;
  spec.seed = 7;
  const LabeledSet set = generate(spec);
  CHECK(set.points.rowwise().mean().norm() < 1e-9);
  const Eigen::Vector2d var =
      set.points.array().square().rowwise().mean();
  CHECK(var.x() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(var.y() == doctest::Approx(1.0).epsilon(1e-9));
  // both classes present
  CHECK(std::count(set.labels.begin(), set.labels.end(), 0) == 5000);
  CHECK(std::count(set.labels.begin(), set.labels.end(), 1) == 5000);
}

TEST_CASE("membership distance measures normal offsets") {
  ToySpec spec = default_toy_spec();
  const BranchCurve& b = spec.classes[0].branches[0];
  for (double delta : {0.01, 0.1, 0.3}) {
    Eigen::Vector2d tangent = bezier_tangent(b, 0.5);
    Eigen::Vector2d normal(-tangent.y(), tangent.x());
    normal.normalize();
    const Eigen::Vector2d x = bezier_point(b, 0.5) + delta * normal;
    CHECK(membership_distance(x, spec, 0) ==
          doctest::Approx(delta).epsilon(2e-2));
  }
}

TEST_CASE("membership distance against a segment closed form") {
  // collinear control points make the branch an exact segment
  ToySpec spec;
  spec.classes.resize(2);
  spec.classes[0].branches = {{{0, 0}, {1, 0}, {2, 0}}};
  spec.classes[1].branches = {{{0, 1}, {1, 1}, {2, 1}}};

  const Eigen::Vector2d probe(0.7, 0.4);
  CHECK(membership_distance(probe, spec, 0) ==
        doctest::Approx(0.4).epsilon(1e-3));
  const Eigen::Vector2d beyond(3.0, 0.0);
  CHECK(membership_distance(beyond, spec, 0) ==
        doctest::Approx(1.0).epsilon(1e-3));
  CHECK_THROWS_AS(membership_distance(probe, spec, 2),
                  std::invalid_argument);
}

TEST_CASE("discretized manifold agrees with the direct distance") {
  ToySpec spec = default_toy_spec();
  const DiscretizedManifold manifold(spec);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Vector2d x(rng.uniform(-2, 2), rng.uniform(-2, 2));
    for (int cls = 0; cls < 2; ++cls)
      CHECK(manifold.distance(x, cls) ==
            doctest::Approx(membership_distance(x, spec, cls))
                .epsilon(1e-12));
  }

  Matrix pts(2, 3);
  pts << 0.0, 1.0, -1.0, 0.0, 0.5, -0.5;
  const Vector d = manifold.distances(pts, 0);
  for (Index j = 0; j < 3; ++j)
    CHECK(d[j] == doctest::Approx(manifold.distance(pts.col(j), 0))
                      .epsilon(1e-12));
}

TEST_CASE("classes stay separated well beyond the jitter scale") {
  ToySpec spec = default_toy_spec();
  spec.n_per_class = 500;
  spec.seed = 5;
  Matrix pts;
  std::vector<int> labels;
  generate_raw(spec, spec.seed, pts, labels);

  const DiscretizedManifold manifold(spec);
  double min_cross = 1e9;
  for (Index j = 0; j < pts.cols(); ++j) {
    const int other = 1 - labels[size_t(j)];
    min_cross = std::min(min_cross, manifold.distance(pts.col(j), other));
  }
  CHECK(min_cross > 3.0 * spec.sigma_across);
}

TEST_CASE("local neighborhoods are strongly anisotropic") {
  // density low enough that 16 neighbors span well beyond the jitter width
  ToySpec spec = default_toy_spec();
  spec.n_per_class = 200;
  spec.seed = 9;
  Matrix pts;
  std::vector<int> labels;
  generate_raw(spec, spec.seed, pts, labels);
  const Index n = pts.cols();

  const int k = 16;
  Index good = 0;
  for (Index j = 0; j < n; ++j) {
    // k nearest neighbors by brute force
    std::vector<std::pair<double, Index>> dist;
    dist.reserve(size_t(n));
    for (Index i = 0; i < n; ++i)
      if (i != j)
        dist.emplace_back((pts.col(i) - pts.col(j)).squaredNorm(), i);
    std::nth_element(dist.begin(), dist.begin() + k, dist.end());

    Matrix nb(2, k);
    for (int m = 0; m < k; ++m) nb.col(m) = pts.col(dist[size_t(m)].second);
    const Eigen::Vector2d mu = nb.rowwise().mean();
    const Matrix centered = nb.colwise() - mu;
    const Eigen::Matrix2d cov =
        centered * centered.transpose() / double(k);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    const double ratio =
        eig.eigenvalues()(1) / std::max(eig.eigenvalues()(0), 1e-30);
    if (ratio > 5.0) ++good;
  }
  CHECK(double(good) / double(n) >= 0.9);
}

TEST_CASE("degenerate specs are rejected") {
  ToySpec spec = default_toy_spec();
  spec.n_per_class = 0;
  CHECK_THROWS_AS(generate(spec), ConfigError);

  ToySpec zero = default_toy_spec();
  zero.classes[0].branches[0] = {{1, 1}, {1, 1}, {1, 1}};
  zero.n_per_class = 10;
  CHECK_THROWS_AS(generate(zero), ConfigError);
}

TEST_CASE("class draws live in the standardized frame") {
  ToySpec spec = default_toy_spec();
  spec.n_per_class = 2000;
  spec.seed = 13;
  const LabeledSet set = generate(spec);

  const Matrix draw = draw_class_points(set, 0, 2000, 77);
  const Matrix again = draw_class_points(set, 0, 2000, 77);
  CHECK((draw.array() == again.array()).all());

  // fresh draws sit on the standardized class-0 manifold
  const DiscretizedManifold manifold(set.spec);
  const Vector d = manifold.distances(draw, 0);
  CHECK(d.maxCoeff() < 0.2);
  CHECK(d.mean() < 0.05);

  CHECK_THROWS_AS(draw_class_points(set, 5, 10, 0), std::invalid_argument);
}

#include <betacfg/toydata.hpp>

#include <cmath>
#include <limits>

#include <betacfg/rng.hpp>

namespace betacfg {

Eigen::Vector2d bezier_point(const BranchCurve& c, double u) {
  const double v = 1.0 - u;
  return v * v * c.p0 + 2.0 * v * u * c.p1 + u * u * c.p2;
}

Eigen::Vector2d bezier_tangent(const BranchCurve& c, double u) {
  return 2.0 * (1.0 - u) * (c.p1 - c.p0) + 2.0 * u * (c.p2 - c.p1);
}

ToySpec default_toy_spec() {
  ToySpec spec;
  spec.n_per_class = 5000;
  spec.sigma_across = 0.02;

  // Class 0: two branches leaving a shared junction on the left, about 60
  // degrees apart, then curving away from each other; class 1 is the point
  // reflection through the origin.
  ClassShape left;
  left.branches.push_back(
      {{-0.55, 0.00}, {-1.50, 0.55}, {-2.35, 1.80}});
  left.branches.push_back(
      {{-0.55, 0.00}, {-1.50, -0.55}, {-2.85, -1.20}});
  ClassShape right;
  for (const BranchCurve& b : left.branches)
    right.branches.push_back({-b.p0, -b.p1, -b.p2});

  spec.classes = {left, right};
  return spec;
}

namespace {

void validate_spec(const ToySpec& spec) {
  if (spec.n_per_class < 1)
    throw ConfigError("n_per_class must be at least 1");
  if (spec.classes.empty()) throw ConfigError("toy spec has no classes");
  if (!(spec.sigma_across >= 0.0))
    throw ConfigError("sigma_across must be non-negative");
  for (const ClassShape& cs : spec.classes) {
    if (cs.branches.empty()) throw ConfigError("class with no branches");
    for (const BranchCurve& b : cs.branches) {
      const double len = (b.p1 - b.p0).norm() + (b.p2 - b.p1).norm();
      if (!(len > 0.0)) throw ConfigError("zero-length branch curve");
    }
  }
}

}  // namespace

void generate_raw(const ToySpec& spec, std::uint64_t seed, Matrix& points,
                  std::vector<int>& labels) {
  validate_spec(spec);
  const int n_classes = int(spec.classes.size());
  const Index n_total = Index(spec.n_per_class) * n_classes;
  points.resize(2, n_total);
  labels.assign(size_t(n_total), 0);

  Index col = 0;
  for (int cls = 0; cls < n_classes; ++cls) {
    Rng rng(derive_seed(seed, std::uint64_t(cls)));
    const ClassShape& shape = spec.classes[size_t(cls)];
    for (int i = 0; i < spec.n_per_class; ++i, ++col) {
      const BranchCurve& b =
          shape.branches[size_t(rng.uniform_int(Index(shape.branches.size())))];
      const double u = rng.uniform();
      Eigen::Vector2d p = bezier_point(b, u);
      // jitter only across the curve normal; the along-curve spread comes
      // from the uniform parameter draw
      Eigen::Vector2d tangent = bezier_tangent(b, u);
      Eigen::Vector2d normal(-tangent.y(), tangent.x());
      normal.normalize();
      p += spec.sigma_across * rng.normal() * normal;
      points.col(col) = p;
      labels[size_t(col)] = cls;
    }
  }
}

namespace {

ToySpec standardize_spec(const ToySpec& raw, const Eigen::Vector2d& mean,
                         const Eigen::Vector2d& scale) {
  ToySpec out = raw;
  auto map = [&](const Eigen::Vector2d& p) -> Eigen::Vector2d {
    return (p - mean).cwiseQuotient(scale);
  };
  for (ClassShape& cs : out.classes)
    for (BranchCurve& b : cs.branches) {
      b.p0 = map(b.p0);
      b.p1 = map(b.p1);
      b.p2 = map(b.p2);
    }
  return out;
}

}  // namespace

LabeledSet generate(const ToySpec& spec) {
  if (spec.classes.size() < 2)
    throw ConfigError("labeled set needs at least two classes");
  LabeledSet set;
  set.raw_spec = spec;
  generate_raw(spec, spec.seed, set.points, set.labels);

  const Index n = set.points.cols();
  set.mean = set.points.rowwise().mean();
  Eigen::Vector2d var =
      (set.points.colwise() - set.mean).array().square().rowwise().sum() /
      double(n);
  set.scale = var.array().sqrt();
  if (!(set.scale.minCoeff() > 0.0))
    throw DataError("degenerate dataset: zero variance coordinate");

  set.points = (set.points.colwise() - set.mean).array().colwise() /
               set.scale.array();
  set.spec = standardize_spec(spec, set.mean, set.scale);
  return set;
}

Matrix draw_class_points(const LabeledSet& ref, int cls, int n,
                         std::uint64_t seed) {
  if (cls < 0 || cls >= ref.n_classes())
    throw std::invalid_argument("invalid class id");
  if (n < 1) throw std::invalid_argument("need at least one point");

  ToySpec one = ref.raw_spec;
  one.n_per_class = n;
  one.classes = {one.classes[size_t(cls)]};

  Matrix pts;
  std::vector<int> labels;
  generate_raw(one, seed, pts, labels);
  return (pts.colwise() - ref.mean).array().colwise() / ref.scale.array();
}

double membership_distance(const Eigen::Vector2d& x, const ToySpec& spec,
                           int cls, int points_per_branch) {
  if (cls < 0 || cls >= int(spec.classes.size()))
    throw std::invalid_argument("invalid class id");
  double best = std::numeric_limits<double>::infinity();
  for (const BranchCurve& b : spec.classes[size_t(cls)].branches)
    for (int i = 0; i < points_per_branch; ++i) {
      const double u = double(i) / (points_per_branch - 1);
      best = std::min(best, (bezier_point(b, u) - x).norm());
    }
  return best;
}

DiscretizedManifold::DiscretizedManifold(const ToySpec& spec,
                                         int points_per_branch) {
  cloud_.reserve(spec.classes.size());
  for (const ClassShape& cs : spec.classes) {
    Matrix cloud(2, Index(cs.branches.size()) * points_per_branch);
    Index col = 0;
    for (const BranchCurve& b : cs.branches)
      for (int i = 0; i < points_per_branch; ++i, ++col)
        cloud.col(col) = bezier_point(b, double(i) / (points_per_branch - 1));
    cloud_.push_back(std::move(cloud));
  }
}

double DiscretizedManifold::distance(const Eigen::Vector2d& x, int cls) const {
  if (cls < 0 || cls >= n_classes())
    throw std::invalid_argument("invalid class id");
  const Matrix& cloud = cloud_[size_t(cls)];
  return std::sqrt(((cloud.row(0).array() - x.x()).square() +
                    (cloud.row(1).array() - x.y()).square())
                       .minCoeff());
}

Vector DiscretizedManifold::distances(const Matrix& points, int cls) const {
  if (cls < 0 || cls >= n_classes())
    throw std::invalid_argument("invalid class id");
  const Matrix& cloud = cloud_[size_t(cls)];
  Vector out(points.cols());
  for (Index j = 0; j < points.cols(); ++j)
    out[j] = std::sqrt(((cloud.row(0).array() - points(0, j)).square() +
                        (cloud.row(1).array() - points(1, j)).square())
                           .minCoeff());
  return out;
}

}  // namespace betacfg

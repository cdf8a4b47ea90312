#pragma once

#include <cstdint>
#include <vector>

#include <betacfg/types.hpp>

namespace betacfg {

// Quadratic Bezier arc; the basic building block of the synthetic manifold.
struct BranchCurve {
  Eigen::Vector2d p0, p1, p2;
};

Eigen::Vector2d bezier_point(const BranchCurve& c, double u);
Eigen::Vector2d bezier_tangent(const BranchCurve& c, double u);

struct ClassShape {
  std::vector<BranchCurve> branches;
};

// Two-class 2D dataset: each class is a small set of smooth branches with
// tight Gaussian jitter across the curve normal, giving locally
// one-dimensional, anisotropic structure.
struct ToySpec {
  int n_per_class = 5000;
  std::uint64_t seed = 0;
  std::vector<ClassShape> classes;
  double sigma_across = 0.02;
};

// Two mirror-image classes of two branches sharing a junction.
ToySpec default_toy_spec();

struct LabeledSet {
  Matrix points;  // 2 x N, standardized to zero mean / unit variance
  std::vector<int> labels;
  Eigen::Vector2d mean;   // standardization: x' = (x - mean) / scale
  Eigen::Vector2d scale;  // per-coordinate std of the raw draw
  ToySpec raw_spec;       // geometry in original coordinates
  ToySpec spec;           // geometry mapped into standardized coordinates

  int n_classes() const { return int(spec.classes.size()); }
};

// Points in original (unstandardized) coordinates; used for geometry-space
// checks and for drawing extra ground-truth sets.
void generate_raw(const ToySpec& spec, std::uint64_t seed, Matrix& points,
                  std::vector<int>& labels);

LabeledSet generate(const ToySpec& spec);

// Extra ground-truth draw of one class, mapped into the standardized
// coordinates of `ref`. Used for metric calibration and coverage references.
Matrix draw_class_points(const LabeledSet& ref, int cls, int n,
                         std::uint64_t seed);

// Minimal Euclidean distance from x to the class-cls branch set, by dense
// curve discretization.
double membership_distance(const Eigen::Vector2d& x, const ToySpec& spec,
                           int cls, int points_per_branch = 10000);

// Dense per-class point clouds cached for bulk distance queries.
class DiscretizedManifold {
 public:
  explicit DiscretizedManifold(const ToySpec& spec,
                               int points_per_branch = 10000);

  double distance(const Eigen::Vector2d& x, int cls) const;
  Vector distances(const Matrix& points, int cls) const;
  int n_classes() const { return int(cloud_.size()); }

 private:
  std::vector<Matrix> cloud_;  // per class, 2 x m
};

}  // namespace betacfg

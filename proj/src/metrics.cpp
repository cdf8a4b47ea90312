#include <betacfg/metrics.hpp>

#include <algorithm>
#include <cmath>

namespace betacfg {

double outlier_rate(const Matrix& samples, const DiscretizedManifold& manifold,
                    int cls, double r) {
  if (samples.cols() == 0) throw DataError("empty sample set");
  if (!(r > 0.0)) throw std::invalid_argument("radius must be positive");
  const Vector d = manifold.distances(samples, cls);
  return double((d.array() > r).count()) / double(d.size());
}

double coverage(const Matrix& samples, const Matrix& reference, double r) {
  if (samples.cols() == 0 || reference.cols() == 0)
    throw DataError("empty inputs to coverage");
  const double r2 = r * r;
  Index covered = 0;
  for (Index j = 0; j < reference.cols(); ++j) {
    const double d2 = ((samples.row(0).array() - reference(0, j)).square() +
                       (samples.row(1).array() - reference(1, j)).square())
                          .minCoeff();
    if (d2 <= r2) ++covered;
  }
  return double(covered) / double(reference.cols());
}

double mean_manifold_distance(const Matrix& samples,
                              const DiscretizedManifold& manifold, int cls) {
  if (samples.cols() == 0) throw DataError("empty sample set");
  return manifold.distances(samples, cls).mean();
}

double class_purity(const Matrix& samples, const NoisyClassifier& classifier,
                    int target) {
  if (samples.cols() == 0) throw DataError("empty sample set");
  if (target < 0 || target >= classifier.n_classes)
    throw std::invalid_argument("invalid target class");
  const Matrix logits = class_logits(classifier, samples, 1);
  Index hits = 0;
  for (Index j = 0; j < logits.cols(); ++j) {
    Index argmax = 0;
    logits.col(j).maxCoeff(&argmax);
    if (int(argmax) == target) ++hits;
  }
  return double(hits) / double(logits.cols());
}

double calibrate_radius(const LabeledSet& ref,
                        const DiscretizedManifold& manifold, int cls,
                        std::uint64_t seed, int n, double quantile) {
  if (!(quantile > 0.0 && quantile < 1.0))
    throw std::invalid_argument("quantile must lie in (0, 1)");
  const Matrix draw = draw_class_points(ref, cls, n, seed);
  Vector d = manifold.distances(draw, cls);
  std::vector<double> v(d.data(), d.data() + d.size());
  const size_t k = size_t(std::ceil(quantile * double(v.size()))) - 1;
  std::nth_element(v.begin(), v.begin() + long(k), v.end());
  return v[k];
}

NormProfile norm_profile_summary(const TrajectoryLog& traj) {
  return norm_profile_summary(std::vector<const TrajectoryLog*>{&traj});
}

NormProfile norm_profile_summary(
    const std::vector<const TrajectoryLog*>& trajs) {
  if (trajs.empty() || !trajs.front() || trajs.front()->step_count() == 0)
    throw DataError("no trajectories to summarize");
  const std::vector<int>& ts = trajs.front()->ts;
  long total = 0;
  for (const TrajectoryLog* t : trajs) {
    if (!t || t->ts != ts) throw DataError("misaligned trajectory step grids");
    total += t->logged_count();
  }
  if (total == 0) throw DataError("no logged trajectories");

  NormProfile p;
  p.ts = ts;
  p.mean.resize(Index(ts.size()));
  p.stddev.resize(Index(ts.size()));
  for (size_t k = 0; k < ts.size(); ++k) {
    double sum = 0.0, sum2 = 0.0;
    for (const TrajectoryLog* t : trajs) {
      sum += t->mod_norm[k].sum();
      sum2 += t->mod_norm[k].squaredNorm();
    }
    const double mean = sum / double(total);
    const double var = std::max(0.0, sum2 / double(total) - mean * mean);
    p.mean[Index(k)] = mean;
    p.stddev[Index(k)] = std::sqrt(var);
  }
  return p;
}

}  // namespace betacfg

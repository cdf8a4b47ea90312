#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <betacfg/models.hpp>
#include <betacfg/sampler.hpp>
#include <betacfg/toydata.hpp>
#include <betacfg/types.hpp>

namespace betacfg {

struct EvalReport {
  double outlier_rate = 0.0;
  double coverage = 0.0;
  double mean_manifold_distance = 0.0;
  double class_purity = 0.0;
  long n_samples = 0;
  std::string rule;
  std::uint64_t seed = 0;
};

// Fraction of samples farther than r from the target-class manifold.
double outlier_rate(const Matrix& samples, const DiscretizedManifold& manifold,
                    int cls, double r);

// Fraction of reference points with at least one sample within distance r;
// a recall-style diversity proxy.
double coverage(const Matrix& samples, const Matrix& reference, double r);

double mean_manifold_distance(const Matrix& samples,
                              const DiscretizedManifold& manifold, int cls);

// Fraction of samples the classifier assigns to the target class at the
// lowest noise level (t = 1).
double class_purity(const Matrix& samples, const NoisyClassifier& classifier,
                    int target);

// Radius giving the requested quantile of ground-truth membership distance
// on a fresh calibration draw; fixed once and reused across all rules.
double calibrate_radius(const LabeledSet& ref,
                        const DiscretizedManifold& manifold, int cls,
                        std::uint64_t seed, int n = 10000,
                        double quantile = 0.99);

struct NormProfile {
  std::vector<int> ts;
  Vector mean;
  Vector stddev;
};

NormProfile norm_profile_summary(const TrajectoryLog& traj);
// merged across runs; all logs must share the same step grid
NormProfile norm_profile_summary(const std::vector<const TrajectoryLog*>& trajs);

}  // namespace betacfg

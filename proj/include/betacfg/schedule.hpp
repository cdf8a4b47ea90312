#pragma once

#include <cmath>
#include <vector>

#include <betacfg/types.hpp>

namespace betacfg {

// Discrete variance schedule of the Gaussian forward process
//   q(x_t | x_{t-1}) = N(x_t; sqrt(1 - beta_t) x_{t-1}, beta_t I)
// together with the derived quantities alpha_t = 1 - beta_t and
// alpha_bar_t = prod_{s<=t} alpha_s. Arrays are indexed by step t in [1, T];
// alpha_bar_at(0) = 1 by convention so the t = 1 reverse step collapses onto
// the predicted clean point.
//
// Immutable after construction; safe to share across threads.
struct NoiseSchedule {
  Array beta;
  Array alpha;
  Array alpha_bar;

  int steps() const { return int(beta.size()); }

  void check_step(int t) const {
    if (t < 1 || t > steps())
      throw std::out_of_range("step index " + std::to_string(t) +
                              " outside [1, " + std::to_string(steps()) + "]");
  }

  double beta_at(int t) const {
    check_step(t);
    return beta[t - 1];
  }
  double alpha_at(int t) const {
    check_step(t);
    return alpha[t - 1];
  }
  double alpha_bar_at(int t) const {
    if (t == 0) return 1.0;
    check_step(t);
    return alpha_bar[t - 1];
  }
};

// beta_t interpolated linearly from beta_start (t = 1) to beta_end (t = T).
// All schedule arithmetic stays in double; the cumulative product over ~1e3
// steps is the precision-sensitive part.
inline NoiseSchedule linear_schedule(int T, double beta_start,
                                     double beta_end) {
  if (T < 1) throw ConfigError("schedule needs at least one step");
  if (!(beta_start > 0.0 && beta_start < 1.0) ||
      !(beta_end > 0.0 && beta_end < 1.0))
    throw ConfigError("beta endpoints must lie in (0, 1)");
  if (beta_start > beta_end)
    throw ConfigError("beta_start must not exceed beta_end");

  NoiseSchedule s;
  s.beta.resize(T);
  if (T == 1) {
    s.beta[0] = beta_start;
  } else {
    for (int t = 0; t < T; ++t)
      s.beta[t] = beta_start + (beta_end - beta_start) * double(t) / (T - 1);
  }
  s.alpha = 1.0 - s.beta;
  s.alpha_bar.resize(T);
  double prod = 1.0;
  for (int t = 0; t < T; ++t) {
    prod *= s.alpha[t];
    s.alpha_bar[t] = prod;
  }
  return s;
}

// e(t) = sqrt(1 - abar_{t-1}) - sqrt(1/alpha_t - abar_{t-1});
// the coefficient that the reverse step applies to the guidance drift.
// Nonzero whenever beta_t > 0.
inline double drift_coefficient(double alpha_t, double alpha_bar_prev) {
  return std::sqrt(1.0 - alpha_bar_prev) -
         std::sqrt(1.0 / alpha_t - alpha_bar_prev);
}

inline double drift_coefficient(const NoiseSchedule& s, int t) {
  s.check_step(t);
  return drift_coefficient(s.alpha_at(t), s.alpha_bar_at(t - 1));
}

// Coefficients of the forward posterior q(x_{t-1} | x_t, x_0):
//   mean = mean_coef_x0 * x_0 + mean_coef_xt * x_t,  variance = var.
struct PosteriorCoeffs {
  double mean_coef_x0 = 0.0;
  double mean_coef_xt = 0.0;
  double var = 0.0;
};

inline PosteriorCoeffs posterior_coeffs(const NoiseSchedule& s, int t) {
  s.check_step(t);
  const double ab = s.alpha_bar_at(t);
  const double abp = s.alpha_bar_at(t - 1);
  const double beta = s.beta_at(t);
  const double alpha = s.alpha_at(t);
  PosteriorCoeffs c;
  if (t == 1) {
    // 1 - abar_1 = beta_1 holds exactly in real arithmetic but not through
    // the stored cumulative product; the posterior must collapse onto x_0.
    c.mean_coef_x0 = 1.0;
    c.mean_coef_xt = 0.0;
    c.var = 0.0;
    return c;
  }
  c.mean_coef_x0 = std::sqrt(abp) * beta / (1.0 - ab);
  c.mean_coef_xt = std::sqrt(alpha) * (1.0 - abp) / (1.0 - ab);
  c.var = (1.0 - abp) / (1.0 - ab) * beta;
  return c;
}

// mu = (x_t - (1 - alpha_t)/sqrt(1 - abar_t) * eps) / sqrt(alpha_t);
// recovers the reverse-process mean from a noise prediction. The eps
// coefficient is zero (not 0/0) in the degenerate alpha_t = 1 case.
template <typename DX, typename DE>
Matrix mean_from_epsilon_with(double alpha_t, double alpha_bar_t,
                              const Eigen::MatrixBase<DX>& x_t,
                              const Eigen::MatrixBase<DE>& eps) {
  if (x_t.rows() != eps.rows() || x_t.cols() != eps.cols())
    throw std::invalid_argument("x_t and eps dimensions differ");
  const double num = 1.0 - alpha_t;
  const double coef = num == 0.0 ? 0.0 : num / std::sqrt(1.0 - alpha_bar_t);
  return (x_t - coef * eps) / std::sqrt(alpha_t);
}

template <typename DX, typename DE>
Matrix mean_from_epsilon(const NoiseSchedule& s, int t,
                         const Eigen::MatrixBase<DX>& x_t,
                         const Eigen::MatrixBase<DE>& eps) {
  s.check_step(t);
  return mean_from_epsilon_with(s.alpha_at(t), s.alpha_bar_at(t), x_t, eps);
}

// Uniform-stride sub-grid used for few-step sampling. ts holds original step
// indices in descending order starting at t = T; step pairs are
// (ts[k], ts[k+1]) with an implicit final target of 0. `sub` re-derives a
// valid schedule on the sub-grid from the stored full-grid alpha_bar values,
// so ancestral sampling can reuse the posterior formulas unchanged.
struct SamplingGrid {
  std::vector<int> ts;
  NoiseSchedule sub;
  int source_steps = 0;

  int step_count() const { return int(ts.size()); }
  int t_at(int k) const { return ts[size_t(k)]; }
  int t_prev(int k) const {
    return k + 1 < step_count() ? ts[size_t(k) + 1] : 0;
  }
  // position of original step ts[k] on the sub-grid, in [1, step_count()]
  int sub_index(int k) const { return step_count() - k; }
};

inline SamplingGrid make_sampling_grid(const NoiseSchedule& full, int nfe) {
  const int T = full.steps();
  if (nfe < 1 || nfe > T)
    throw ConfigError("sampling steps must lie in [1, schedule steps]");

  SamplingGrid g;
  g.source_steps = T;
  g.ts.resize(size_t(nfe));
  for (int k = 0; k < nfe; ++k)
    g.ts[size_t(k)] = int(std::llround(double(T) * double(nfe - k) / nfe));
  for (int k = 0; k + 1 < nfe; ++k)
    if (g.ts[size_t(k)] <= g.ts[size_t(k) + 1])
      throw ConfigError("degenerate sampling grid");
  if (g.ts.back() < 1) throw ConfigError("degenerate sampling grid");

  g.sub.beta.resize(nfe);
  g.sub.alpha.resize(nfe);
  g.sub.alpha_bar.resize(nfe);
  double prev_ab = 1.0;
  for (int j = 1; j <= nfe; ++j) {
    const double ab = full.alpha_bar_at(g.ts[size_t(nfe - j)]);
    g.sub.alpha_bar[j - 1] = ab;
    g.sub.alpha[j - 1] = ab / prev_ab;
    g.sub.beta[j - 1] = 1.0 - g.sub.alpha[j - 1];
    prev_ab = ab;
  }
  return g;
}

}  // namespace betacfg

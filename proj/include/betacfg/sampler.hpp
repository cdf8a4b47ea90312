#pragma once

#include <cstdint>
#include <vector>

#include <betacfg/guidance.hpp>
#include <betacfg/models.hpp>
#include <betacfg/schedule.hpp>
#include <betacfg/types.hpp>

namespace betacfg {

// Per-step record of the reverse chain for the logged subset of samples.
// Steps are ordered by decreasing t. modification[k] is the difference
// between the guided and unguided step outputs on the same state, i.e. the
// drift e(t) E_c actually applied; eps_diff_norm[k] is the norm of
// eps_hat - eps_uncond before the step formula scales it.
struct TrajectoryLog {
  std::vector<int> ts;
  std::vector<int> sample_ids;        // logged column -> sample index
  std::vector<Matrix> x_before;       // per step, D x n_logged
  std::vector<Matrix> modification;   // per step, D x n_logged
  std::vector<Vector> mod_norm;       // per step, n_logged
  std::vector<Vector> eps_diff_norm;  // per step, n_logged
  Matrix final_x;                     // D x batch, all samples

  int step_count() const { return int(ts.size()); }
  int logged_count() const { return int(sample_ids.size()); }
  // state after step k equals the state before step k+1
  const Matrix& x_after(int k) const {
    return k + 1 < step_count() ? x_before[size_t(k) + 1] : final_logged;
  }
  Matrix final_logged;  // logged columns of final_x
};

enum class SamplerMode { Ddim, DdpmAncestral };
enum class AncestralVariance { Posterior, Beta };
// CFG++ renoises the predicted clean point with the unconditional
// prediction by default; Guided switches to eps_hat (plain-DDIM behavior).
enum class CfgppRenoise { Uncond, Guided };

struct SamplerConfig {
  int steps = 50;
  GuidanceRule rule = NoGuidance{};
  std::uint64_t seed = 0;
  int batch = 1;
  SamplerMode mode = SamplerMode::Ddim;
  AncestralVariance variance = AncestralVariance::Posterior;
  CfgppRenoise cfgpp_renoise = CfgppRenoise::Uncond;
  int log_cap = 1024;  // full logging up to this batch size, strided above
};

// x_{t_prev} = sqrt(abar_prev) x0_hat + sqrt(1 - abar_prev) eps_hat, with
// x0_hat = (x_t - sqrt(1 - abar_t) eps_hat) / sqrt(abar_t). t_prev = 0 uses
// abar_0 = 1 and collapses onto the predicted clean point.
Matrix ddim_step(const NoiseSchedule& s, const Matrix& x_t, int t, int t_prev,
                 const Matrix& eps_hat);

struct GuidedStep {
  Matrix x_prev;
  Matrix modification;  // x_prev minus the unguided DDIM step from x_t
  GuidedEps eps;
};

GuidedStep guided_ddim_step(const NoiseSchedule& s, const Matrix& x_t, int t,
                            int t_prev, const GuidanceRule& rule,
                            const GuidanceContext& ctx);

// CFG++ stepping: the clean-point estimate uses the guided eps_hat while the
// renoising term uses eps_uncond (unless overridden).
GuidedStep cfgpp_step(const NoiseSchedule& s, const Matrix& x_t, int t,
                      int t_prev, const GuidanceRule& rule,
                      const GuidanceContext& ctx, CfgppRenoise renoise);

// One ancestral step: posterior mean from the noise prediction plus
// sqrt(var) * noise, with the variance chosen as beta_t or the posterior
// beta-tilde. Noise is suppressed at t = 1.
Matrix ddpm_ancestral_step(const NoiseSchedule& s, const Matrix& x_t, int t,
                           const Matrix& eps_hat, const Matrix& noise,
                           AncestralVariance variance);

struct SampleResult {
  Matrix samples;  // D x batch
  TrajectoryLog trajectory;
};

// Full reverse chain from x_T ~ N(0, I) over the strided sub-grid. Each
// sample owns a random stream derived from (seed, sample index), so results
// do not depend on batch composition.
SampleResult sample(const SamplerConfig& cfg, const Denoiser& d,
                    int cond_class, const NoisyClassifier* classifier = nullptr);

}  // namespace betacfg

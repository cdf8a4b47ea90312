#include <betacfg/sampler.hpp>

#include <cmath>

#include <betacfg/rng.hpp>

namespace betacfg {

namespace {

void check_step_pair(const NoiseSchedule& s, int t, int t_prev) {
  s.check_step(t);
  if (t_prev < 0 || t_prev >= t)
    throw std::invalid_argument("invalid step pair (" + std::to_string(t) +
                                ", " + std::to_string(t_prev) + ")");
}

}  // namespace

Matrix ddim_step(const NoiseSchedule& s, const Matrix& x_t, int t, int t_prev,
                 const Matrix& eps_hat) {
  check_step_pair(s, t, t_prev);
  if (x_t.rows() != eps_hat.rows() || x_t.cols() != eps_hat.cols())
    throw std::invalid_argument("x_t and eps_hat dimensions differ");
  const double ab = s.alpha_bar_at(t);
  const double abp = s.alpha_bar_at(t_prev);
  const Matrix x0_hat = (x_t - std::sqrt(1.0 - ab) * eps_hat) / std::sqrt(ab);
  return std::sqrt(abp) * x0_hat + std::sqrt(1.0 - abp) * eps_hat;
}

GuidedStep guided_ddim_step(const NoiseSchedule& s, const Matrix& x_t, int t,
                            int t_prev, const GuidanceRule& rule,
                            const GuidanceContext& ctx) {
  GuidedStep step;
  step.eps = apply_rule(rule, ctx);
  step.x_prev = ddim_step(s, x_t, t, t_prev, step.eps.eps_hat);
  step.modification =
      step.x_prev - ddim_step(s, x_t, t, t_prev, step.eps.eps_uncond);
  return step;
}

GuidedStep cfgpp_step(const NoiseSchedule& s, const Matrix& x_t, int t,
                      int t_prev, const GuidanceRule& rule,
                      const GuidanceContext& ctx, CfgppRenoise renoise) {
  check_step_pair(s, t, t_prev);
  GuidedStep step;
  step.eps = apply_rule(rule, ctx);
  const double ab = s.alpha_bar_at(t);
  const double abp = s.alpha_bar_at(t_prev);
  const Matrix x0_hat =
      (x_t - std::sqrt(1.0 - ab) * step.eps.eps_hat) / std::sqrt(ab);
  const Matrix& renoise_eps = renoise == CfgppRenoise::Guided
                                  ? step.eps.eps_hat
                                  : step.eps.eps_uncond;
  step.x_prev = std::sqrt(abp) * x0_hat + std::sqrt(1.0 - abp) * renoise_eps;
  step.modification =
      step.x_prev - ddim_step(s, x_t, t, t_prev, step.eps.eps_uncond);
  return step;
}

Matrix ddpm_ancestral_step(const NoiseSchedule& s, const Matrix& x_t, int t,
                           const Matrix& eps_hat, const Matrix& noise,
                           AncestralVariance variance) {
  s.check_step(t);
  if (noise.rows() != x_t.rows() || noise.cols() != x_t.cols())
    throw std::invalid_argument("noise dimensions differ from x_t");
  const Matrix mu = mean_from_epsilon(s, t, x_t, eps_hat);
  if (t == 1) return mu;  // final step: collapse onto the mean
  const double var = variance == AncestralVariance::Posterior
                         ? posterior_coeffs(s, t).var
                         : s.beta_at(t);
  return mu + std::sqrt(var) * noise;
}

SampleResult sample(const SamplerConfig& cfg, const Denoiser& d,
                    int cond_class, const NoisyClassifier* classifier) {
  validate(cfg.rule);
  if (cfg.batch < 1) throw ConfigError("batch must be at least 1");
  if (cond_class < 0 || cond_class >= d.n_classes)
    throw ConfigError("condition class outside [0, n_classes)");
  if (needs_classifier(cfg.rule) && !classifier)
    throw ConfigError("rule '" + describe(cfg.rule) +
                      "' requires a classifier");

  const SamplingGrid grid = make_sampling_grid(d.schedule, cfg.steps);
  const int D = d.data_dim;
  const int B = cfg.batch;

  // one stream per sample; ancestral noise comes from the same streams
  std::vector<Rng> streams;
  streams.reserve(size_t(B));
  for (int j = 0; j < B; ++j)
    streams.emplace_back(derive_seed(cfg.seed, std::uint64_t(j)));

  Matrix x(D, B);
  for (int j = 0; j < B; ++j)
    for (int i = 0; i < D; ++i) x(i, j) = streams[size_t(j)].normal();

  const int log_stride = B <= cfg.log_cap ? 1 : (B + cfg.log_cap - 1) / cfg.log_cap;
  TrajectoryLog log;
  for (int j = 0; j < B; j += log_stride) log.sample_ids.push_back(j);
  const int n_logged = log.logged_count();
  log.ts.reserve(size_t(grid.step_count()));

  auto logged_columns = [&](const Matrix& m) {
    Matrix out(D, n_logged);
    for (int j = 0; j < n_logged; ++j)
      out.col(j) = m.col(log.sample_ids[size_t(j)]);
    return out;
  };

  Matrix noise(D, B);
  for (int k = 0; k < grid.step_count(); ++k) {
    const int t = grid.t_at(k);
    const int t_prev = grid.t_prev(k);

    GuidanceContext ctx;
    ctx.denoiser = &d;
    ctx.classifier = classifier;
    ctx.x_t = &x;
    ctx.t = t;
    ctx.nfe = cfg.steps;
    ctx.cond_class = cond_class;

    GuidedStep step;
    if (cfg.mode == SamplerMode::Ddim) {
      step = is_cfgpp_family(cfg.rule)
                 ? cfgpp_step(d.schedule, x, t, t_prev, cfg.rule, ctx,
                              cfg.cfgpp_renoise)
                 : guided_ddim_step(d.schedule, x, t, t_prev, cfg.rule, ctx);
    } else {
      // ancestral stepping runs on the re-derived sub-grid schedule
      const int tj = grid.sub_index(k);
      step.eps = apply_rule(cfg.rule, ctx);
      if (tj > 1) {
        for (int j = 0; j < B; ++j)
          for (int i = 0; i < D; ++i) noise(i, j) = streams[size_t(j)].normal();
      } else {
        noise.setZero();
      }
      step.x_prev = ddpm_ancestral_step(grid.sub, x, tj, step.eps.eps_hat,
                                        noise, cfg.variance);
      // drift applied this step = shift of the posterior mean
      step.modification =
          step.x_prev - ddpm_ancestral_step(grid.sub, x, tj,
                                            step.eps.eps_uncond, noise,
                                            cfg.variance);
    }

    log.ts.push_back(t);
    log.x_before.push_back(logged_columns(x));
    Matrix mod = logged_columns(step.modification);
    log.mod_norm.push_back(mod.colwise().norm().transpose());
    log.modification.push_back(std::move(mod));
    log.eps_diff_norm.push_back(
        logged_columns(step.eps.eps_hat - step.eps.eps_uncond)
            .colwise()
            .norm()
            .transpose());

    x = std::move(step.x_prev);
  }

  log.final_x = x;
  log.final_logged = logged_columns(x);

  SampleResult result;
  result.trajectory = std::move(log);
  result.samples = result.trajectory.final_x;
  return result;
}

}  // namespace betacfg

#pragma once

#include <cmath>
#include <string>
#include <variant>

#include <betacfg/beta_weight.hpp>
#include <betacfg/models.hpp>
#include <betacfg/schedule.hpp>
#include <betacfg/types.hpp>

namespace betacfg {

// Below this, a conditional/unconditional difference carries no usable
// direction; norm-normalized rules emit zero guidance instead of dividing
// by it.
inline constexpr double kDegenerateNorm = 1e-12;

// Unconditional and conditional noise predictions for the same batch, one
// sample per column.
struct EpsPair {
  Matrix eps_uncond;
  Matrix eps_cond;
};

// eps_hat = eps_uncond + w (eps_cond - eps_uncond)
inline Matrix cfg_eps(const EpsPair& p, double w) {
  return p.eps_uncond + w * (p.eps_cond - p.eps_uncond);
}

// eps_hat = eps_uncond + beta_ab(t/T) * omega * d / ||d||^gamma, with
// d = eps_cond - eps_uncond and the norm taken over the whole per-sample
// difference vector. `unit_weight` pins beta(t) to 1; it exists so the
// gamma = 0 reduction to plain CFG can be exercised directly.
inline Matrix beta_cfg_eps(const EpsPair& p, double omega,
                           const BetaWeight& weight, double gamma, int t,
                           int T, bool unit_weight = false) {
  const double wt = unit_weight ? 1.0 : weight_at_step(weight, t, T);
  const Matrix d = p.eps_cond - p.eps_uncond;
  Matrix out = p.eps_uncond;
  for (Index j = 0; j < d.cols(); ++j) {
    const double nrm = d.col(j).norm();
    if (gamma > 0.0 && nrm < kDegenerateNorm) continue;
    const double scale = wt * omega / std::pow(nrm, gamma);
    out.col(j) += scale * d.col(j);
  }
  return out;
}

// CFG++ variant of the same update; lambda plays the role of omega.
inline Matrix beta_cfgpp_eps(const EpsPair& p, double lambda,
                             const BetaWeight& weight, double gamma, int t,
                             int T, bool unit_weight = false) {
  return beta_cfg_eps(p, lambda, weight, gamma, t, T, unit_weight);
}

// eps_hat = eps - sqrt(1 - abar_t) * w * grad_log_p
inline Matrix classifier_eps(const Matrix& eps, const Matrix& grad_log_p,
                             double w, const NoiseSchedule& s, int t) {
  if (eps.rows() != grad_log_p.rows() || eps.cols() != grad_log_p.cols())
    throw std::invalid_argument("eps and gradient dimensions differ");
  return eps - std::sqrt(1.0 - s.alpha_bar_at(t)) * w * grad_log_p;
}

// eps_hat = eps - w * (sqrt(D)/T) * grad_p / ||grad_p||; the update length
// is fixed at w sqrt(D)/T regardless of the gradient magnitude. Vanishing
// gradients contribute nothing.
inline Matrix geoguide_eps(const Matrix& eps, const Matrix& grad_p, double w,
                           int D, int T) {
  if (eps.rows() != grad_p.rows() || eps.cols() != grad_p.cols())
    throw std::invalid_argument("eps and gradient dimensions differ");
  const double len = w * std::sqrt(double(D)) / double(T);
  Matrix out = eps;
  for (Index j = 0; j < grad_p.cols(); ++j) {
    const double nrm = grad_p.col(j).norm();
    if (nrm < kDegenerateNorm) continue;
    out.col(j) -= (len / nrm) * grad_p.col(j);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rule selection

struct NoGuidance {};
struct ClassifierGuidanceRule {
  double w = 1.0;
};
struct GeoGuideRule {
  double w = 1.0;
};
struct CfgRule {
  double w = 7.5;
};
struct CfgPlusPlusRule {
  double lambda = 0.6;
};
struct BetaCfgRule {
  double omega = 7.5;
  BetaWeight weight = make_beta_weight(2.0, 2.0);
  double gamma = 1.0;
  bool unit_weight = false;
};
struct BetaCfgPlusPlusRule {
  double lambda = 0.6;
  BetaWeight weight = make_beta_weight(2.0, 2.0);
  double gamma = 1.0;
  bool unit_weight = false;
};

using GuidanceRule =
    std::variant<NoGuidance, ClassifierGuidanceRule, GeoGuideRule, CfgRule,
                 CfgPlusPlusRule, BetaCfgRule, BetaCfgPlusPlusRule>;

void validate(const GuidanceRule& rule);
bool needs_classifier(const GuidanceRule& rule);
// rules that follow the CFG++ stepping scheme (clean-point renoising)
bool is_cfgpp_family(const GuidanceRule& rule);
std::string describe(const GuidanceRule& rule);

struct GuidanceContext {
  const Denoiser* denoiser = nullptr;
  const NoisyClassifier* classifier = nullptr;
  const Matrix* x_t = nullptr;
  int t = 0;          // step index on the full schedule grid
  int nfe = 0;        // sampler step count (GeoGuide length scale)
  int cond_class = 0;
};

struct GuidedEps {
  Matrix eps_hat;
  Matrix eps_uncond;
};

// Routes to the rule's update formula. All rules report the unconditional
// prediction alongside eps_hat so the sampler can log the guidance
// modification against the unguided step.
GuidedEps apply_rule(const GuidanceRule& rule, const GuidanceContext& ctx);

}  // namespace betacfg

#include <betacfg/guidance.hpp>

#include <sstream>

namespace betacfg {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

void validate(const GuidanceRule& rule) {
  std::visit(
      [](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, CfgPlusPlusRule>) {
          if (!(r.lambda >= 0.0 && r.lambda <= 1.0))
            throw ConfigError("cfg++ lambda must lie in [0, 1]");
        } else if constexpr (std::is_same_v<R, BetaCfgRule>) {
          if (!(r.gamma >= 0.0))
            throw ConfigError("gamma must be non-negative");
        } else if constexpr (std::is_same_v<R, BetaCfgPlusPlusRule>) {
          if (!(r.lambda >= 0.0 && r.lambda <= 1.0))
            throw ConfigError("beta-cfg++ lambda must lie in [0, 1]");
          if (!(r.gamma >= 0.0))
            throw ConfigError("gamma must be non-negative");
        }
      },
      rule);
}

bool needs_classifier(const GuidanceRule& rule) {
  return std::holds_alternative<ClassifierGuidanceRule>(rule) ||
         std::holds_alternative<GeoGuideRule>(rule);
}

bool is_cfgpp_family(const GuidanceRule& rule) {
  return std::holds_alternative<CfgPlusPlusRule>(rule) ||
         std::holds_alternative<BetaCfgPlusPlusRule>(rule);
}

std::string describe(const GuidanceRule& rule) {
  return std::visit(
      [](const auto& r) -> std::string {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, NoGuidance>) {
          return "none";
        } else if constexpr (std::is_same_v<R, ClassifierGuidanceRule>) {
          return "classifier(w=" + fmt(r.w) + ")";
        } else if constexpr (std::is_same_v<R, GeoGuideRule>) {
          return "geoguide(w=" + fmt(r.w) + ")";
        } else if constexpr (std::is_same_v<R, CfgRule>) {
          return "cfg(w=" + fmt(r.w) + ")";
        } else if constexpr (std::is_same_v<R, CfgPlusPlusRule>) {
          return "cfgpp(lambda=" + fmt(r.lambda) + ")";
        } else if constexpr (std::is_same_v<R, BetaCfgRule>) {
          return "beta-cfg(omega=" + fmt(r.omega) + ",a=" + fmt(r.weight.a) +
                 ",b=" + fmt(r.weight.b) + ",gamma=" + fmt(r.gamma) + ")";
        } else {
          return "beta-cfgpp(lambda=" + fmt(r.lambda) +
                 ",a=" + fmt(r.weight.a) + ",b=" + fmt(r.weight.b) +
                 ",gamma=" + fmt(r.gamma) + ")";
        }
      },
      rule);
}

GuidedEps apply_rule(const GuidanceRule& rule, const GuidanceContext& ctx) {
  if (!ctx.denoiser || !ctx.x_t)
    throw std::invalid_argument("guidance context missing denoiser or state");
  const Denoiser& d = *ctx.denoiser;
  const Matrix& x = *ctx.x_t;
  const int T = d.schedule.steps();
  if (needs_classifier(rule) && !ctx.classifier)
    throw ConfigError("rule '" + describe(rule) +
                      "' requires a trained classifier");

  GuidedEps out;
  out.eps_uncond = predict_eps(d, x, ctx.t, d.null_token());

  std::visit(
      [&](const auto& r) {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, NoGuidance>) {
          out.eps_hat = out.eps_uncond;
        } else if constexpr (std::is_same_v<R, ClassifierGuidanceRule>) {
          const Matrix g =
              grad_log_prob(*ctx.classifier, x, ctx.t, ctx.cond_class);
          out.eps_hat = classifier_eps(out.eps_uncond, g, r.w, d.schedule,
                                       ctx.t);
        } else if constexpr (std::is_same_v<R, GeoGuideRule>) {
          const Matrix g = grad_prob(*ctx.classifier, x, ctx.t,
                                     ctx.cond_class);
          out.eps_hat = geoguide_eps(out.eps_uncond, g, r.w, int(x.rows()),
                                     ctx.nfe);
        } else {
          const EpsPair pair{out.eps_uncond,
                             predict_eps(d, x, ctx.t, ctx.cond_class)};
          if constexpr (std::is_same_v<R, CfgRule>) {
            out.eps_hat = cfg_eps(pair, r.w);
          } else if constexpr (std::is_same_v<R, CfgPlusPlusRule>) {
            out.eps_hat = cfg_eps(pair, r.lambda);
          } else if constexpr (std::is_same_v<R, BetaCfgRule>) {
            out.eps_hat = beta_cfg_eps(pair, r.omega, r.weight, r.gamma,
                                       ctx.t, T, r.unit_weight);
          } else {
            out.eps_hat = beta_cfgpp_eps(pair, r.lambda, r.weight, r.gamma,
                                         ctx.t, T, r.unit_weight);
          }
        }
      },
      rule);
  return out;
}

}  // namespace betacfg

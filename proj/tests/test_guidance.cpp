#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <betacfg/guidance.hpp>
#include <betacfg/rng.hpp>

using namespace betacfg;

namespace {

EpsPair random_pair(Rng& rng, Index d = 2, Index n = 1) {
  return {rng.normal_matrix(d, n), rng.normal_matrix(d, n)};
}

Denoiser random_denoiser(std::uint64_t seed, int T = 100) {
  Denoiser d;
  d.schedule = linear_schedule(T, 1e-3, 0.05);
  d.n_classes = 2;
  d.embed_dim = 4;
  d.n_time_freqs = 8;
  d.data_dim = 2;
  Rng rng(seed);
  d.net = make_mlp({int(d.input_dim()), 24, 24, 2}, Activation::Silu, rng);
  d.cond_embedding = rng.normal_matrix(3, 4);
  return d;
}

}  // namespace

TEST_CASE("cfg_eps basics") {
  Rng rng(1);
  const EpsPair p = random_pair(rng);

  // w = 1 reproduces the conditional prediction
  CHECK((cfg_eps(p, 1.0) - p.eps_cond).norm() < 1e-14);

  // equal predictions are a fixed point for any w
  const EpsPair same{p.eps_uncond, p.eps_uncond};
  CHECK((cfg_eps(same, 3.7).array() == p.eps_uncond.array()).all());

  EpsPair q;
  q.eps_uncond = Matrix::Zero(2, 1);
  q.eps_cond = Matrix::Zero(2, 1);
  q.eps_cond(0, 0) = 1.0;
  const Matrix out = cfg_eps(q, 2.0);
  CHECK(out(0, 0) == 2.0);
  CHECK(out(1, 0) == 0.0);
}

TEST_CASE("beta_cfg_eps silences guidance at t = T") {
  Rng rng(2);
  const EpsPair p = random_pair(rng);
  const BetaWeight w = make_beta_weight(2.0, 2.0);
  const Matrix out = beta_cfg_eps(p, 7.5, w, 1.0, 100, 100);
  CHECK((out.array() == p.eps_uncond.array()).all());
}

TEST_CASE("beta_cfg_eps with gamma 0 scales the raw difference") {
  // beta(0.5) = 1.5 for (2,2); omega = 2 -> coefficient 3
  EpsPair p;
  p.eps_uncond = Matrix::Zero(2, 1);
  p.eps_cond = Matrix::Zero(2, 1);
  p.eps_cond(0, 0) = 1.0;
  const BetaWeight w = make_beta_weight(2.0, 2.0);
  const Matrix out = beta_cfg_eps(p, 2.0, w, 0.0, 5, 10);
  CHECK(out(0, 0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(out(1, 0) == 0.0);
}

TEST_CASE("beta_cfg_eps with gamma 1 pins the guidance norm") {
  EpsPair p;
  p.eps_uncond = Matrix::Zero(2, 1);
  p.eps_cond = Matrix::Zero(2, 1);
  p.eps_cond(0, 0) = 3.0;
  p.eps_cond(1, 0) = 4.0;
  const BetaWeight w = make_beta_weight(2.0, 2.0);
  const Matrix out = beta_cfg_eps(p, 2.0, w, 1.0, 5, 10);
  CHECK(out(0, 0) == doctest::Approx(1.8).epsilon(1e-12));
  CHECK(out(1, 0) == doctest::Approx(2.4).epsilon(1e-12));
  CHECK(out.col(0).norm() == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("degenerate difference with positive gamma yields zero guidance") {
  Rng rng(3);
  Matrix u = rng.normal_matrix(2, 1);
  EpsPair p{u, u};
  p.eps_cond(0, 0) += 1e-15;
  const BetaWeight w = make_beta_weight(2.0, 2.0);
  const Matrix out = beta_cfg_eps(p, 5.0, w, 1.0, 5, 10);
  CHECK((out.array() == u.array()).all());
}

TEST_CASE("norm law holds across random pairs") {
  Rng rng(4);
  const BetaWeight w = make_beta_weight(2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const EpsPair p = random_pair(rng, 2, 3);
    const int t = 1 + int(rng.uniform_int(99));
    const double omega = rng.uniform(0.5, 8.0);
    const Matrix out = beta_cfg_eps(p, omega, w, 1.0, t, 100);
    const double expect = weight_at_step(w, t, 100) * omega;
    for (Index j = 0; j < 3; ++j) {
      if ((p.eps_cond.col(j) - p.eps_uncond.col(j)).norm() < 1e-12) continue;
      CHECK((out.col(j) - p.eps_uncond.col(j)).norm() ==
            doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("gamma 1 is invariant to the difference scale") {
  Rng rng(5);
  const BetaWeight w = make_beta_weight(2.0, 2.0);
  for (double s : {0.5, 3.0, 1000.0}) {
    const EpsPair p = random_pair(rng);
    EpsPair scaled{p.eps_uncond,
                   p.eps_uncond + s * (p.eps_cond - p.eps_uncond)};
    const Matrix a = beta_cfg_eps(p, 2.0, w, 1.0, 40, 100);
    const Matrix b = beta_cfg_eps(scaled, 2.0, w, 1.0, 40, 100);
    CHECK((a - b).norm() < 1e-12 * (1.0 + a.norm()));
  }
}

TEST_CASE("reduction identity: unit weight and gamma 0 reduce to plain cfg") {
  Rng rng(6);
  const BetaWeight w = make_beta_weight(2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const EpsPair p = random_pair(rng, 2, 2);
    const double omega = rng.uniform(0.0, 10.0);
    const int t = 1 + int(rng.uniform_int(100));
    const Matrix reduced =
        beta_cfg_eps(p, omega, w, 0.0, t, 100, /*unit_weight=*/true);
    const Matrix plain = cfg_eps(p, omega);
    CHECK((reduced.array() == plain.array()).all());
  }
}

TEST_CASE("beta_cfgpp_eps coincides with beta_cfg_eps") {
  Rng rng(7);
  const BetaWeight w = make_beta_weight(2.5, 2.0);
  const EpsPair p = random_pair(rng);

  const Matrix a = beta_cfgpp_eps(p, 0.6, w, 1.0, 30, 100);
  const Matrix b = beta_cfg_eps(p, 0.6, w, 1.0, 30, 100);
  CHECK((a.array() == b.array()).all());

  // lambda = 0 returns the unconditional prediction
  const Matrix c = beta_cfgpp_eps(p, 0.0, w, 1.0, 30, 100);
  CHECK((c.array() == p.eps_uncond.array()).all());

  // guidance-term norm = beta(1/2) * lambda at the midpoint
  EpsPair q;
  q.eps_uncond = Matrix::Zero(2, 1);
  q.eps_cond = rng.normal_matrix(2, 1);
  const BetaWeight w22 = make_beta_weight(2.0, 2.0);
  const Matrix mid = beta_cfgpp_eps(q, 0.6, w22, 1.0, 50, 100);
  CHECK(mid.col(0).norm() == doctest::Approx(1.5 * 0.6).epsilon(1e-12));
}

TEST_CASE("classifier_eps closed forms") {
  NoiseSchedule s;
  s.beta = Array::Constant(1, 0.25);
  s.alpha = Array::Constant(1, 0.75);
  s.alpha_bar = Array::Constant(1, 0.75);

  Matrix eps = Matrix::Zero(2, 1);
  Matrix grad = Matrix::Zero(2, 1);
  grad(0, 0) = 1.0;

  // w = 0 and grad = 0 are both no-ops
  CHECK((classifier_eps(eps, grad, 0.0, s, 1).array() == 0.0).all());
  CHECK((classifier_eps(eps, Matrix::Zero(2, 1), 2.0, s, 1).array() == 0.0)
            .all());

  // sqrt(1 - 0.75) * 2 = 1
  const Matrix out = classifier_eps(eps, grad, 2.0, s, 1);
  CHECK(out(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(out(1, 0) == 0.0);
}

TEST_CASE("geoguide_eps applies fixed-length updates") {
  Rng rng(8);
  const Matrix eps = rng.normal_matrix(2, 1);
  const Matrix grad = rng.normal_matrix(2, 1);

  const Matrix out = geoguide_eps(eps, grad, 1.0, 2, 10);
  CHECK((out - eps).norm() ==
        doctest::Approx(std::sqrt(2.0) / 10.0).epsilon(1e-12));

  // invariant to the gradient magnitude
  const Matrix out_scaled = geoguide_eps(eps, (1000.0 * grad).eval(), 1.0, 2, 10);
  CHECK((out - out_scaled).norm() < 1e-12);

  // w = 0 is a no-op
  CHECK((geoguide_eps(eps, grad, 0.0, 2, 10).array() == eps.array()).all());

  // zero gradient contributes nothing
  CHECK((geoguide_eps(eps, Matrix::Zero(2, 1), 1.0, 2, 10).array() ==
         eps.array())
            .all());
}

TEST_CASE("rule validation") {
  CHECK_THROWS_AS(validate(GuidanceRule{CfgPlusPlusRule{1.5}}), ConfigError);
  CHECK_THROWS_AS(validate(GuidanceRule{CfgPlusPlusRule{-0.1}}), ConfigError);
  GuidanceRule bad = BetaCfgRule{1.0, make_beta_weight(2, 2), -0.5};
  CHECK_THROWS_AS(validate(bad), ConfigError);
  CHECK_NOTHROW(validate(GuidanceRule{CfgRule{25.0}}));
  CHECK_NOTHROW(validate(GuidanceRule{BetaCfgRule{}}));
}

TEST_CASE("apply_rule routes and reports the unconditional baseline") {
  const Denoiser d = random_denoiser(10);
  const Matrix x = Matrix::Random(2, 3);

  GuidanceContext ctx;
  ctx.denoiser = &d;
  ctx.x_t = &x;
  ctx.t = 50;
  ctx.nfe = 50;
  ctx.cond_class = 1;

  const GuidedEps none = apply_rule(NoGuidance{}, ctx);
  CHECK((none.eps_hat.array() == none.eps_uncond.array()).all());
  CHECK((none.eps_uncond -
         predict_eps(d, x, 50, d.null_token()))
            .norm() == 0.0);

  // cfg at w = 1 is plain conditional prediction
  const GuidedEps cfg1 = apply_rule(CfgRule{1.0}, ctx);
  CHECK((cfg1.eps_hat - predict_eps(d, x, 50, 1)).norm() < 1e-14);

  // classifier-style rules demand a classifier
  CHECK_THROWS_AS(apply_rule(ClassifierGuidanceRule{1.0}, ctx), ConfigError);
  CHECK_THROWS_AS(apply_rule(GeoGuideRule{1.0}, ctx), ConfigError);

  // the beta rule reduces to cfg bit-for-bit under the debug override
  BetaCfgRule reduced{3.0, make_beta_weight(2, 2), 0.0, true};
  const GuidedEps a = apply_rule(reduced, ctx);
  const GuidedEps b = apply_rule(CfgRule{3.0}, ctx);
  CHECK((a.eps_hat.array() == b.eps_hat.array()).all());

  // endpoint silence at t = T for both beta rules
  ctx.t = d.schedule.steps();
  const GuidedEps end1 = apply_rule(BetaCfgRule{}, ctx);
  CHECK((end1.eps_hat.array() == end1.eps_uncond.array()).all());
  const GuidedEps end2 = apply_rule(BetaCfgPlusPlusRule{}, ctx);
  CHECK((end2.eps_hat.array() == end2.eps_uncond.array()).all());
}

TEST_CASE("rule descriptions name the rule and its dials") {
  CHECK(describe(NoGuidance{}) == "none");
  CHECK(describe(CfgRule{7.5}) == "cfg(w=7.5)");
  CHECK(describe(BetaCfgRule{7.5, make_beta_weight(2, 2), 1.0}) ==
        "beta-cfg(omega=7.5,a=2,b=2,gamma=1)");
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <betacfg/beta_weight.hpp>
#include <betacfg/rng.hpp>
#include <betacfg/special.hpp>

using namespace betacfg;

TEST_CASE("log_gamma hits exact values") {
  CHECK(std::abs(log_gamma(1.0)) < 1e-14);
  CHECK(std::abs(log_gamma(2.0)) < 1e-14);
  CHECK(log_gamma(0.5) ==
        doctest::Approx(0.5 * std::log(std::numbers::pi)).epsilon(1e-13));
  CHECK(log_gamma(10.0) ==
        doctest::Approx(std::log(362880.0)).epsilon(1e-13));
  CHECK_THROWS_AS(log_gamma(0.0), std::domain_error);
}

TEST_CASE("log_gamma tracks libm to 1e-12 on [1, 10]") {
  for (double x = 1.0; x <= 10.0; x += 0.0625)
    CHECK(log_gamma(x) == doctest::Approx(std::lgamma(x)).epsilon(1e-12));
}

TEST_CASE("beta normalizer closed forms") {
  CHECK(std::exp(make_beta_weight(2.0, 2.0).log_norm) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(std::exp(make_beta_weight(2.0, 3.0).log_norm) ==
        doctest::Approx(1.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("shape parameters at or below one are rejected") {
  CHECK_THROWS_AS(make_beta_weight(1.0, 2.0), ConfigError);
  CHECK_THROWS_AS(make_beta_weight(2.0, 1.0), ConfigError);
  CHECK_THROWS_AS(make_beta_weight(0.5, 0.5), ConfigError);
  CHECK_THROWS_WITH_AS(make_beta_weight(1.0, 2.0),
                       doctest::Contains("vanishes"), ConfigError);
}

TEST_CASE("density endpoints are exactly zero") {
  for (double a : {2.0, 2.5, 3.0})
    for (double b : {2.0, 2.5, 3.0}) {
      const BetaWeight w = make_beta_weight(a, b);
      CHECK(density(w, 0.0) == 0.0);
      CHECK(density(w, 1.0) == 0.0);
    }
}

TEST_CASE("density closed form and mode") {
  const BetaWeight w22 = make_beta_weight(2.0, 2.0);
  CHECK(density(w22, 0.5) == doctest::Approx(1.5).epsilon(1e-12));

  // mode of Beta(2, 3) at (a-1)/(a+b-2) = 1/3
  const BetaWeight w23 = make_beta_weight(2.0, 3.0);
  const double u_star = 1.0 / 3.0;
  CHECK(density(w23, u_star) >= density(w23, u_star - 1e-3));
  CHECK(density(w23, u_star) >= density(w23, u_star + 1e-3));

  CHECK_THROWS_AS(density(w22, -0.01), std::out_of_range);
  CHECK_THROWS_AS(density(w22, 1.01), std::out_of_range);
}

TEST_CASE("density integrates to one") {
  const int n = 100000;
  for (double a : {2.0, 2.5, 3.0})
    for (double b : {2.0, 2.5, 3.0}) {
      const BetaWeight w = make_beta_weight(a, b);
      double integral = 0.0;
      double prev = density(w, 0.0);
      for (int i = 1; i <= n; ++i) {
        const double cur = density(w, double(i) / n);
        integral += 0.5 * (prev + cur) / n;
        prev = cur;
      }
      CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("symmetric shapes give a symmetric density") {
  Rng rng(3);
  for (double a : {2.0, 3.0, 5.5}) {
    const BetaWeight w = make_beta_weight(a, a);
    for (int i = 0; i < 50; ++i) {
      const double u = rng.uniform();
      CHECK(density(w, u) ==
            doctest::Approx(density(w, 1.0 - u)).epsilon(1e-12));
    }
  }
}

TEST_CASE("weight_at_step endpoints and midpoint") {
  const BetaWeight w = make_beta_weight(2.0, 2.0);
  CHECK(weight_at_step(w, 1000, 1000) == 0.0);
  CHECK(weight_at_step(w, 500, 1000) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK_THROWS_AS(weight_at_step(w, 0, 1000), std::out_of_range);
  CHECK_THROWS_AS(weight_at_step(w, 1001, 1000), std::out_of_range);
}

TEST_CASE("discrete weight sweep is single-modal") {
  const int T = 1000;
  for (const auto& [a, b] :
       {std::pair{2.0, 2.0}, {2.0, 3.0}, {3.0, 2.0}, {2.5, 2.5}, {5.0, 1.5}}) {
    const BetaWeight w = make_beta_weight(a, b);
    int sign_changes = 0;
    int last_sign = 0;
    for (int t = 2; t <= T; ++t) {
      const double diff = weight_at_step(w, t, T) - weight_at_step(w, t - 1, T);
      const int sign = diff > 0.0 ? 1 : diff < 0.0 ? -1 : 0;
      if (sign == 0) continue;
      if (last_sign != 0 && sign != last_sign) ++sign_changes;
      last_sign = sign;
    }
    CHECK(sign_changes == 1);
  }
}

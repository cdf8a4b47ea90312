#pragma once

#include <cmath>

#include <betacfg/special.hpp>
#include <betacfg/types.hpp>

namespace betacfg {

// Beta(a, b) density on [0, 1], used as the time-dependent guidance scale.
// Both shape parameters must exceed 1 so that the density is exactly zero at
// both ends of the interval, which is what silences guidance at the start
// and end of the reverse trajectory.
//
// Immutable after construction.
struct BetaWeight {
  double a = 2.0;
  double b = 2.0;
  double log_norm = 0.0;  // ln B(a, b)
};

inline BetaWeight make_beta_weight(double a, double b) {
  if (!(a > 1.0) || !(b > 1.0))
    throw ConfigError(
        "beta weight requires a > 1 and b > 1 so the density vanishes at "
        "u = 0 and u = 1 (got a=" +
        std::to_string(a) + ", b=" + std::to_string(b) + ")");
  return BetaWeight{a, b, log_beta(a, b)};
}

// u^(a-1) (1-u)^(b-1) / B(a, b), evaluated in log space. Exactly zero at the
// endpoints, not merely small.
inline double density(const BetaWeight& w, double u) {
  if (!(u >= 0.0 && u <= 1.0))
    throw std::out_of_range("beta weight argument outside [0, 1]");
  if (u == 0.0 || u == 1.0) return 0.0;
  return std::exp((w.a - 1.0) * std::log(u) + (w.b - 1.0) * std::log1p(-u) -
                  w.log_norm);
}

// Guidance scale for discrete step t of T, on the rescaled time u = t/T.
// t = T lands on u = 1 where the density is zero, so the very first reverse
// step is never guided.
inline double weight_at_step(const BetaWeight& w, int t, int T) {
  if (t < 1 || t > T)
    throw std::out_of_range("step index " + std::to_string(t) +
                            " outside [1, " + std::to_string(T) + "]");
  return density(w, double(t) / double(T));
}

}  // namespace betacfg

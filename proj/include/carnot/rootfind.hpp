#pragma once

#include <type_traits>
#include <vector>

#include "carnot/errors.hpp"
#include "carnot/xreal.hpp"

namespace carnot {

/// Solves g(lambda) = sum_i t_i * lambda^(-e_i) = 1 for lambda > 0,
/// given t_i >= 0 with at least one t_i > 0 and all e_i > 0. g is strictly
/// decreasing from +inf to 0 on (0, inf), so the root exists and is unique.
///
/// Double scalars bracket by doubling/halving from lambda = 1 and bisect
/// arithmetically. XReal scalars start from the analytic lower bound
/// lambda0 = max_i t_i^(1/e_i) (g(lambda0) >= 1 always), double upward,
/// and bisect geometrically; doubling from 1 is hopeless when the root's
/// exponent is astronomically large. Both keep the certified bracket
/// g(lo) >= 1 >= g(hi).
template <class S>
S solve_gauge_radius(const std::vector<S>& t, const std::vector<double>& e,
                     double rel_tol, int max_iter) {
  if (t.empty()) throw DomainError("solve_gauge_radius: no terms");
  if (t.size() != e.size()) throw ShapeError("solve_gauge_radius: term/exponent mismatch");
  for (double ei : e)
    if (!(ei > 0.0)) throw DomainError("solve_gauge_radius: exponents must be > 0");

  auto g = [&](const S& lam) {
    S acc(0.0);
    for (std::size_t i = 0; i < t.size(); ++i) acc += t[i] * pow(lam, -e[i]);
    return acc;
  };

  const S one(1.0);
  S lo, hi;

  if constexpr (std::is_same_v<S, XReal>) {
    S lam0(0.0);
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i].is_zero()) continue;
      S cand = pow(t[i], 1.0 / e[i]);
      if (cand > lam0) lam0 = cand;
    }
    if (lam0.is_zero()) throw DomainError("solve_gauge_radius: all terms zero");
    if (g(lam0) == one) return lam0;
    lo = lam0;
    hi = lam0;
    int guard = 0;
    for (;;) {
      hi = hi * S(2.0);
      S ghi = g(hi);
      if (ghi == one) return hi;
      if (ghi < one) break;
      lo = hi;
      if (++guard > 2000) throw ConvergenceError("solve_gauge_radius: bracketing failed");
    }
    for (int it = 0; it < max_iter; ++it) {
      if (hi - lo <= lo * S(rel_tol)) break;
      S mid = sqrt(lo * hi);
      if (mid <= lo || mid >= hi) break;  // bracket exhausted at mantissa precision
      S gm = g(mid);
      if (gm == one) return mid;
      if (gm > one)
        lo = mid;
      else
        hi = mid;
    }
    return sqrt(lo * hi);
  } else {
    static_assert(std::is_same_v<S, double>);
    int guard = 0;
    double g1 = g(1.0);
    if (g1 == 1.0) return 1.0;
    if (g1 > 1.0) {
      lo = 1.0;
      hi = 2.0;
      for (;;) {
        double gh = g(hi);
        if (gh == 1.0) return hi;
        if (gh < 1.0) break;
        lo = hi;
        hi *= 2.0;
        if (++guard > 1100) throw ConvergenceError("solve_gauge_radius: bracketing failed");
      }
    } else {
      hi = 1.0;
      lo = 0.5;
      for (;;) {
        double gl = g(lo);
        if (gl == 1.0) return lo;
        if (gl > 1.0) break;
        hi = lo;
        lo *= 0.5;
        if (++guard > 1100) throw ConvergenceError("solve_gauge_radius: bracketing failed");
      }
    }
    for (int it = 0; it < max_iter; ++it) {
      if (hi - lo <= rel_tol * lo) break;
      double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      double gm = g(mid);
      if (gm == 1.0) return mid;
      if (gm > 1.0)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }
}

}  // namespace carnot

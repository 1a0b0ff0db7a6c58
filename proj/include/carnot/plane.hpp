#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "carnot/errors.hpp"
#include "carnot/rng.hpp"
#include "carnot/rootfind.hpp"
#include "carnot/xreal.hpp"

namespace carnot {

/// The 2-D homogeneous group (R^2, +) with dilations (l*x, l^s*y) and the
/// gauge ball alpha|x|^a + beta|y|^b <= 1. The vertical weight s is a real
/// parameter, so arbitrary-step behaviour is covered without group
/// arithmetic beyond vector addition.
struct PlaneModel {
  double s = 1.0;
  double a = 1.0;
  double b = 1.0;
  double alpha = 1.0;
  double beta = 1.0;

  void validate() const {
    for (double v : {s, a, b, alpha, beta})
      if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError("PlaneModel: all parameters must be positive and finite");
  }

  bool normalized() const { return alpha == 1.0 && beta == 1.0; }
};

template <class S>
using PlanePoint = std::array<S, 2>;

template <class S>
S plane_gauge_value(const PlaneModel& m, const S& x, const S& y) {
  S acc(0.0);
  S ax = abs(x), ay = abs(y);
  if (ax > S(0.0)) acc += S(m.alpha) * pow(ax, m.a);
  if (ay > S(0.0)) acc += S(m.beta) * pow(ay, m.b);
  return acc;
}

template <class S>
S plane_from_origin(const PlaneModel& m, const S& x, const S& y,
                    double rel_tol = 1e-12, int max_iter = 200) {
  if (!isfinite(x) || !isfinite(y))
    throw DomainError("plane_from_origin: non-finite coordinates");
  if (x == S(0.0) && y == S(0.0)) return S(0.0);
  std::vector<S> t;
  std::vector<double> e;
  S ax = abs(x), ay = abs(y);
  if (ax > S(0.0)) {
    t.push_back(S(m.alpha) * pow(ax, m.a));
    e.push_back(m.a);
  }
  if (ay > S(0.0)) {
    t.push_back(S(m.beta) * pow(ay, m.b));
    e.push_back(m.s * m.b);
  }
  return solve_gauge_radius(t, e, rel_tol, max_iter);
}

/// Translation-invariant quasi-distance of the plane model.
template <class S>
S plane_distance(const PlaneModel& m, const PlanePoint<S>& p, const PlanePoint<S>& q,
                 double rel_tol = 1e-12, int max_iter = 200) {
  return plane_from_origin(m, q[0] - p[0], q[1] - p[1], rel_tol, max_iter);
}

/// Sampled lower bound for the plane model's quasi-triangle constant.
inline double plane_estimate_qt_constant(const PlaneModel& m, int samples,
                                         std::uint64_t seed) {
  if (samples < 1) throw DomainError("plane_estimate_qt_constant: samples must be >= 1");
  m.validate();
  Rng rng(seed);
  auto rand_point = [&] {
    return PlanePoint<double>{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
  };
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    auto p = rand_point(), mid = rand_point(), q = rand_point();
    double den = plane_distance(m, p, mid) + plane_distance(m, mid, q);
    if (den <= 0.0) continue;
    double ratio = plane_distance(m, p, q) / den;
    if (ratio > best) best = ratio;
  }
  return best;
}

}  // namespace carnot

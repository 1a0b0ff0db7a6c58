#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "carnot/errors.hpp"
#include "carnot/group.hpp"
#include "carnot/rng.hpp"
#include "carnot/rootfind.hpp"
#include "carnot/xreal.hpp"

namespace carnot {

enum class GaugeForm { coordinate, layer };

/// Unit ball of a homogeneous quasi-distance, in one of two shapes:
///   coordinate:  c_1|x_1|^g_1 + ... + c_n|x_n|^g_n <= 1
///   layer:       c_1||xbar_1||^g_1 + ... + c_s||xbar_s||^g_s <= 1
/// where xbar_j is the layer-j coordinate block and ||.|| is Euclidean.
/// Membership depends on |x_i| only, so K is automatically symmetric.
class GaugeBall {
 public:
  GaugeBall(GaugeForm form, std::vector<double> c, std::vector<double> gamma)
      : form_(form), c_(std::move(c)), gamma_(std::move(gamma)) {
    if (c_.size() != gamma_.size())
      throw ShapeError("GaugeBall: coefficient/exponent count mismatch");
    if (c_.empty()) throw ShapeError("GaugeBall: empty coefficient list");
    for (double v : c_)
      if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError("GaugeBall: coefficients must be positive and finite");
    for (double v : gamma_)
      if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError("GaugeBall: exponents must be positive and finite");
  }

  /// Euclidean unit ball: all c = 1, all gamma = 2, coordinate form.
  static GaugeBall euclidean(int n) {
    return GaugeBall(GaugeForm::coordinate, std::vector<double>(n, 1.0),
                     std::vector<double>(n, 2.0));
  }

  GaugeForm form() const { return form_; }
  const std::vector<double>& coefficients() const { return c_; }
  const std::vector<double>& exponents() const { return gamma_; }

  /// Count check against a group: n values (coordinate) or s values (layer).
  void bind_check(const GroupSpec& g) const {
    std::size_t want = form_ == GaugeForm::coordinate ? static_cast<std::size_t>(g.dim())
                                                      : static_cast<std::size_t>(g.step());
    if (c_.size() != want)
      throw ShapeError("GaugeBall: coefficient count does not match the group (" +
                       std::to_string(c_.size()) + " vs " + std::to_string(want) + ")");
  }

 private:
  GaugeForm form_;
  std::vector<double> c_;
  std::vector<double> gamma_;
};

/// Left-hand side of the ball inequality at p; membership in K iff <= 1.
template <class S>
S gauge_value(const GroupSpec& g, const GaugeBall& ball, const Point<S>& p) {
  detail::check_point(g, p.size(), "gauge_value");
  ball.bind_check(g);
  S acc(0.0);
  if (ball.form() == GaugeForm::coordinate) {
    for (int i = 0; i < g.dim(); ++i) {
      S a = abs(p.c[i]);
      if (a > S(0.0)) acc += S(ball.coefficients()[i]) * pow(a, ball.exponents()[i]);
    }
  } else {
    for (int j = 1; j <= g.step(); ++j) {
      S sq(0.0);
      for (int i = g.cumulative(j - 1); i < g.cumulative(j); ++i) sq += p.c[i] * p.c[i];
      if (sq > S(0.0))
        acc += S(ball.coefficients()[j - 1]) * pow(sqrt(sq), ball.exponents()[j - 1]);
    }
  }
  return acc;
}

namespace detail {

/// Nonzero terms (t_i, e_i) of g(lambda) = sum t_i lambda^(-e_i) for the
/// gauge equation of p: t_i = c_i |x_i|^gamma_i, e_i = weight(i)*gamma_i
/// (layer form analogous with block norms).
template <class S>
void gauge_equation_terms(const GroupSpec& g, const GaugeBall& ball, const Point<S>& p,
                          std::vector<S>& t, std::vector<double>& e) {
  t.clear();
  e.clear();
  if (ball.form() == GaugeForm::coordinate) {
    for (int i = 0; i < g.dim(); ++i) {
      S a = abs(p.c[i]);
      if (a > S(0.0)) {
        t.push_back(S(ball.coefficients()[i]) * pow(a, ball.exponents()[i]));
        e.push_back(g.weight(i + 1) * ball.exponents()[i]);
      }
    }
  } else {
    for (int j = 1; j <= g.step(); ++j) {
      S sq(0.0);
      for (int i = g.cumulative(j - 1); i < g.cumulative(j); ++i) sq += p.c[i] * p.c[i];
      if (sq > S(0.0)) {
        t.push_back(S(ball.coefficients()[j - 1]) * pow(sqrt(sq), ball.exponents()[j - 1]));
        e.push_back(j * ball.exponents()[j - 1]);
      }
    }
  }
}

template <class S>
bool all_finite(const Point<S>& p) {
  for (const auto& v : p.c)
    if (!isfinite(v)) return false;
  return true;
}

}  // namespace detail

/// Homogeneous quasi-distance induced by a gauge ball:
/// d(p, q) = inf { l > 0 : delta_{1/l}(p^{-1} q) in K }.
///
/// d(0, p) is the unique root of the monotone gauge equation; evaluation
/// is pure and safe to share across threads.
class QuasiDistance {
 public:
  QuasiDistance(GroupSpec g, GaugeBall ball, double rel_tol = 1e-12, int max_iter = 200)
      : g_(std::move(g)), ball_(std::move(ball)), rel_tol_(rel_tol), max_iter_(max_iter) {
    if (!(rel_tol_ > 0.0)) throw DomainError("QuasiDistance: tolerance must be > 0");
    if (max_iter_ < 1) throw DomainError("QuasiDistance: max_iter must be >= 1");
    ball_.bind_check(g_);
  }

  const GroupSpec& group() const { return g_; }
  const GaugeBall& ball() const { return ball_; }
  double rel_tol() const { return rel_tol_; }
  int max_iter() const { return max_iter_; }

  template <class S>
  S gauge_value(const Point<S>& p) const {
    return carnot::gauge_value(g_, ball_, p);
  }

  template <class S>
  S from_origin(const Point<S>& p) const {
    detail::check_point(g_, p.size(), "from_origin");
    if (!detail::all_finite(p)) throw DomainError("from_origin: non-finite coordinates");
    if (p.is_zero()) return S(0.0);
    std::vector<S> t;
    std::vector<double> e;
    detail::gauge_equation_terms(g_, ball_, p, t, e);
    return solve_gauge_radius(t, e, rel_tol_, max_iter_);
  }

  template <class S>
  S distance(const Point<S>& p, const Point<S>& q) const {
    return from_origin(multiply(g_, inverse(g_, p), q));
  }

  /// Deterministic points at gauge distance 1 from the origin: seeded
  /// Gaussian directions radially rescaled by delta_{1/d(0,p)}.
  std::vector<PointD> unit_sphere_sample(int count, std::uint64_t seed) const {
    if (count < 0) throw DomainError("unit_sphere_sample: negative count");
    std::vector<PointD> out;
    out.reserve(static_cast<std::size_t>(count));
    Rng rng(seed);
    while (static_cast<int>(out.size()) < count) {
      PointD dir = PointD::zero(g_.dim());
      for (int i = 0; i < g_.dim(); ++i) dir.c[i] = rng.normal();
      if (dir.is_zero()) continue;
      double d0 = from_origin(dir);
      if (!(d0 > 0.0) || !std::isfinite(d0)) continue;
      out.push_back(dilate(g_, 1.0 / d0, dir));
    }
    return out;
  }

  /// Sampled lower bound for the quasi-triangle constant:
  /// max over triples of d(p,q) / (d(p,p') + d(p',q)).
  double estimate_qt_constant(int samples, std::uint64_t seed) const {
    if (samples < 1) throw DomainError("estimate_qt_constant: samples must be >= 1");
    Rng rng(seed);
    auto rand_point = [&] {
      PointD p = PointD::zero(g_.dim());
      for (int i = 0; i < g_.dim(); ++i) p.c[i] = rng.uniform(-2.0, 2.0);
      return p;
    };
    double best = 0.0;
    for (int s = 0; s < samples; ++s) {
      PointD p = rand_point(), mid = rand_point(), q = rand_point();
      double den = distance(p, mid) + distance(mid, q);
      if (den <= 0.0) continue;
      double ratio = distance(p, q) / den;
      if (ratio > best) best = ratio;
    }
    return best;
  }

 private:
  GroupSpec g_;
  GaugeBall ball_;
  double rel_tol_;
  int max_iter_;
};

}  // namespace carnot

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "carnot/errors.hpp"
#include "carnot/gauge.hpp"
#include "carnot/group.hpp"
#include "carnot/rng.hpp"

namespace carnot {

/// Step-2 quotient of a step-3 group by its top layer, together with the
/// induced gauge ball on the first m_2 coordinates. The quotient metric is
/// computed from the parent gauge (zero-padding realizes the fiber
/// infimum because the ball inequality is increasing in the dropped
/// coordinates); the induced ball gives the same metric intrinsically,
/// and the two routes are kept separate so they can be checked against
/// each other.
class QuotientSpec {
 public:
  QuotientSpec(GroupSpec parent, GaugeBall parent_ball, double rel_tol = 1e-12,
               int max_iter = 200)
      : parent_qd_(std::move(parent), std::move(parent_ball), rel_tol, max_iter),
        quotient_(make_quotient_group(parent_qd_.group())),
        induced_qd_(quotient_, make_induced_ball(parent_qd_.group(), parent_qd_.ball()),
                    rel_tol, max_iter) {}

  const GroupSpec& parent() const { return parent_qd_.group(); }
  const GaugeBall& parent_ball() const { return parent_qd_.ball(); }
  const QuasiDistance& parent_qd() const { return parent_qd_; }
  const GroupSpec& quotient() const { return quotient_; }
  const GaugeBall& induced_ball() const { return induced_qd_.ball(); }
  /// Gauge metric of the induced ball (the intrinsic description of the
  /// quotient metric).
  const QuasiDistance& induced_qd() const { return induced_qd_; }
  int m2() const { return parent().cumulative(2); }

 private:
  static GroupSpec make_quotient_group(const GroupSpec& g) {
    if (g.step() != 3)
      throw UnsupportedStepError("QuotientSpec: parent must have step 3");
    int m2 = g.cumulative(2);
    std::vector<BracketEntry> kept;
    for (const auto& e : g.brackets()) {
      if (e.i > m2 || e.j > m2) continue;
      BracketEntry ne{e.i, e.j, {}};
      for (const auto& t : e.terms)
        if (t.k <= m2) ne.terms.push_back(t);
      if (!ne.terms.empty()) kept.push_back(std::move(ne));
    }
    std::string name = g.name().empty() ? "quotient" : g.name() + "_quotient";
    return GroupSpec(2, {g.layer_dims()[0], g.layer_dims()[1]}, std::move(kept), name);
  }

  static GaugeBall make_induced_ball(const GroupSpec& g, const GaugeBall& ball) {
    int m2 = g.cumulative(2);
    if (ball.form() == GaugeForm::coordinate) {
      std::vector<double> c(ball.coefficients().begin(),
                            ball.coefficients().begin() + m2);
      std::vector<double> gamma(ball.exponents().begin(), ball.exponents().begin() + m2);
      return GaugeBall(GaugeForm::coordinate, std::move(c), std::move(gamma));
    }
    std::vector<double> c(ball.coefficients().begin(), ball.coefficients().begin() + 2);
    std::vector<double> gamma(ball.exponents().begin(), ball.exponents().begin() + 2);
    return GaugeBall(GaugeForm::layer, std::move(c), std::move(gamma));
  }

  QuasiDistance parent_qd_;
  GroupSpec quotient_;
  QuasiDistance induced_qd_;
};

inline QuotientSpec derive_quotient(const GroupSpec& g, const GaugeBall& ball) {
  return QuotientSpec(g, ball);
}

/// Coordinate projection onto the first m_2 coordinates; a group
/// homomorphism by the grading.
template <class S>
Point<S> project(const QuotientSpec& qs, const Point<S>& p) {
  detail::check_point(qs.parent(), p.size(), "project");
  Point<S> out;
  out.c.assign(p.c.begin(), p.c.begin() + qs.m2());
  return out;
}

/// Fiber representative [p_hat, 0] in the parent.
template <class S>
Point<S> pad_zero(const QuotientSpec& qs, const Point<S>& p_hat) {
  detail::check_point(qs.quotient(), p_hat.size(), "pad_zero");
  Point<S> out = Point<S>::zero(qs.parent().dim());
  for (int i = 0; i < qs.m2(); ++i) out.c[i] = p_hat.c[i];
  return out;
}

/// Quotient metric by definition: the distance between fibers, realized at
/// the zero-padded representative of the quotient difference.
template <class S>
S quotient_from_origin(const QuotientSpec& qs, const Point<S>& p_hat) {
  return qs.parent_qd().from_origin(pad_zero(qs, p_hat));
}

template <class S>
S quotient_distance(const QuotientSpec& qs, const Point<S>& p_hat, const Point<S>& q_hat) {
  const GroupSpec& qg = qs.quotient();
  return quotient_from_origin(qs, multiply(qg, inverse(qg, p_hat), q_hat));
}

/// Point of the fiber over q_hat realizing d(p, fiber) = d_hat(p_hat, q_hat):
/// q = p * [p_hat^{-1} * q_hat, 0]. project(q) = q_hat on the nose.
template <class S>
Point<S> lift_point(const QuotientSpec& qs, const Point<S>& p, const Point<S>& q_hat) {
  detail::check_point(qs.parent(), p.size(), "lift_point");
  const GroupSpec& qg = qs.quotient();
  Point<S> w = multiply(qg, inverse(qg, project(qs, p)), q_hat);
  return multiply(qs.parent(), p, pad_zero(qs, w));
}

/// Quotient dilations (weights 1, 1, ..., 2, 2, ...).
template <class S, class L>
Point<S> quotient_dilate(const QuotientSpec& qs, const L& lambda, const Point<S>& p_hat) {
  return dilate(qs.quotient(), lambda, p_hat);
}

// ---------------------------------------------------------------------------
// Sampled submetry verification

struct SubmetryReport {
  double max_subset_violation = 0.0;     // d_hat(pi p, pi w) <= d(p, w) side
  double max_superset_violation = 0.0;   // lifted point stays in the source ball
  double max_lift_optimality_violation = 0.0;  // lift beats sampled fiber points
  double max_projection_mismatch = 0.0;  // project(lift) == q_hat
  int samples = 0;
  std::uint64_t seed = 0;

  bool pass(double tol) const {
    return max_subset_violation <= tol && max_superset_violation <= tol &&
           max_lift_optimality_violation <= tol && max_projection_mismatch <= tol;
  }
};

namespace detail {

/// Uniform sample of the unit ball of a gauge metric by rejection inside
/// the coordinate bounding box |x_i| <= (1/c_i)^(1/gamma_i).
inline PointD sample_unit_ball(const QuasiDistance& qd, Rng& rng) {
  const GroupSpec& g = qd.group();
  std::vector<double> bound(static_cast<std::size_t>(g.dim()), 1.0);
  const auto& ball = qd.ball();
  if (ball.form() == GaugeForm::coordinate) {
    for (int i = 0; i < g.dim(); ++i)
      bound[i] = std::pow(1.0 / ball.coefficients()[i], 1.0 / ball.exponents()[i]);
  } else {
    for (int i = 0; i < g.dim(); ++i) {
      int j = g.weight(i + 1);
      bound[i] = std::pow(1.0 / ball.coefficients()[j - 1], 1.0 / ball.exponents()[j - 1]);
    }
  }
  for (;;) {
    PointD p = PointD::zero(g.dim());
    for (int i = 0; i < g.dim(); ++i) p.c[i] = rng.uniform(-bound[i], bound[i]);
    if (qd.gauge_value(p) <= 1.0) return p;
  }
}

}  // namespace detail

/// Two-sided sampled check that the projection maps balls onto balls of
/// the same radius, plus lift optimality against sampled fiber points.
/// Violations are relative to the tested radius.
inline SubmetryReport submetry_check(const QuotientSpec& qs, int samples, std::uint64_t seed) {
  if (samples < 1) throw DomainError("submetry_check: samples must be >= 1");
  SubmetryReport rep;
  rep.samples = samples;
  rep.seed = seed;
  Rng rng(seed);
  const GroupSpec& g = qs.parent();
  const QuasiDistance& qd = qs.parent_qd();

  for (int s = 0; s < samples; ++s) {
    PointD p = PointD::zero(g.dim());
    for (int i = 0; i < g.dim(); ++i) p.c[i] = rng.uniform(-1.0, 1.0);
    double r = rng.uniform(0.25, 2.0);

    // subset: project a random point of B(p, r)
    PointD z = detail::sample_unit_ball(qd, rng);
    PointD w = multiply(g, p, dilate(g, r, z));
    double dw = qd.distance(p, w);
    if (dw > 0.0) {
      double dq = quotient_distance(qs, project(qs, p), project(qs, w));
      rep.max_subset_violation = std::max(rep.max_subset_violation, (dq - dw) / dw);
    }

    // superset: lift a random point of the target ball B(pi(p), r)
    PointD z_hat = detail::sample_unit_ball(qs.induced_qd(), rng);
    PointD q_hat =
        multiply(qs.quotient(), project(qs, p), quotient_dilate(qs, r, z_hat));
    double rho = quotient_distance(qs, project(qs, p), q_hat);
    PointD lifted = lift_point(qs, p, q_hat);
    double d_lift = qd.distance(p, lifted);
    double scale = std::max(rho, 1e-6);
    rep.max_superset_violation =
        std::max(rep.max_superset_violation, (d_lift - rho) / scale);

    PointD back = project(qs, lifted);
    for (int i = 0; i < qs.m2(); ++i)
      rep.max_projection_mismatch =
          std::max(rep.max_projection_mismatch, std::fabs(back.c[i] - q_hat.c[i]));

    // lift optimality: no sampled fiber point of q_hat does better
    PointD fiber = pad_zero(qs, q_hat);
    for (int t = 0; t < 3; ++t) {
      for (int i = qs.m2(); i < g.dim(); ++i) fiber.c[i] = rng.uniform(-2.0, 2.0);
      double d_fiber = qd.distance(p, fiber);
      rep.max_lift_optimality_violation =
          std::max(rep.max_lift_optimality_violation, (d_lift - d_fiber) / scale);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Embedded Heisenberg restriction

/// The subgroup of the quotient spanned by first-layer directions Y_i, Y_j
/// and their bracket, identified with the first Heisenberg group, carrying
/// the induced 3-variable gauge: the z-direction enters through the bracket
/// coordinates xi with terms c_k |xi_k z|^{gamma_k}.
struct HeisenbergRestriction {
  int i = 0;
  int j = 0;
  std::vector<double> xi;  // coefficients of [Y_i, Y_j] on the layer-2 coordinates
};

inline HeisenbergRestriction heisenberg_restriction(const QuotientSpec& qs, int i, int j) {
  const GroupSpec& qg = qs.quotient();
  int m1 = qg.cumulative(1);
  if (i < 1 || i > m1 || j < 1 || j > m1 || i == j)
    throw ShapeError("heisenberg_restriction: i, j must be distinct first-layer indices");
  HeisenbergRestriction h;
  h.i = i;
  h.j = j;
  h.xi.assign(static_cast<std::size_t>(qs.m2() - m1), 0.0);
  std::vector<double> ei(static_cast<std::size_t>(qg.dim()), 0.0);
  std::vector<double> ej(ei);
  ei[static_cast<std::size_t>(i) - 1] = 1.0;
  ej[static_cast<std::size_t>(j) - 1] = 1.0;
  std::vector<double> br(static_cast<std::size_t>(qg.dim()), 0.0);
  detail::add_bracket(qg, ei, ej, 1.0, br);
  bool nonzero = false;
  for (int k = m1; k < qs.m2(); ++k) {
    h.xi[static_cast<std::size_t>(k - m1)] = br[static_cast<std::size_t>(k)];
    if (br[static_cast<std::size_t>(k)] != 0.0) nonzero = true;
  }
  if (!nonzero)
    throw DomainError("heisenberg_restriction: [Y_i, Y_j] = 0 (degenerate bracket)");
  return h;
}

/// exp(x Y_i + y Y_j + z [Y_i, Y_j]) in quotient coordinates.
template <class S>
Point<S> heisenberg_embed(const QuotientSpec& qs, const HeisenbergRestriction& h, const S& x,
                          const S& y, const S& z) {
  int m1 = qs.quotient().cumulative(1);
  Point<S> out = Point<S>::zero(qs.quotient().dim());
  out.c[static_cast<std::size_t>(h.i) - 1] = x;
  out.c[static_cast<std::size_t>(h.j) - 1] = y;
  for (std::size_t t = 0; t < h.xi.size(); ++t)
    out.c[static_cast<std::size_t>(m1) + t] = z * S(h.xi[t]);
  return out;
}

/// Induced ball inequality value at (x, y, z).
template <class S>
S restricted_gauge_value(const QuotientSpec& qs, const HeisenbergRestriction& h, const S& x,
                         const S& y, const S& z) {
  return gauge_value(qs.quotient(), qs.induced_ball(), heisenberg_embed(qs, h, x, y, z));
}

/// Gauge distance from the origin inside the restriction: horizontal terms
/// scale with exponent gamma, the bracket coordinate with 2*gamma.
template <class S>
S restricted_from_origin(const QuotientSpec& qs, const HeisenbergRestriction& h, const S& x,
                         const S& y, const S& z) {
  return qs.induced_qd().from_origin(heisenberg_embed(qs, h, x, y, z));
}

}  // namespace carnot

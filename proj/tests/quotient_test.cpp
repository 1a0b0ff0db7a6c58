#include <catch2/catch.hpp>

#include <cmath>

#include "carnot/quotient.hpp"
#include "carnot/rng.hpp"

using namespace carnot;

namespace {

PointD rand_point(const GroupSpec& g, Rng& rng, double range = 1.0) {
  PointD p = PointD::zero(g.dim());
  for (int i = 0; i < g.dim(); ++i) p.c[i] = rng.uniform(-range, range);
  return p;
}

QuotientSpec canonical_quotient() {
  return derive_quotient(free_nilpotent_2_3(), GaugeBall::euclidean(5));
}

}  // namespace

TEST_CASE("quotient of the free step-3 group is the Heisenberg presentation") {
  QuotientSpec qs = canonical_quotient();
  CHECK(qs.quotient().step() == 2);
  CHECK(qs.quotient().dim() == 3);
  CHECK(qs.quotient().layer_dims() == std::vector<int>{2, 1});
  REQUIRE(qs.quotient().canonical_brackets().size() == 1);
  const auto& br = qs.quotient().canonical_brackets()[0];
  CHECK(br.i == 1);
  CHECK(br.j == 2);
  REQUIRE(br.terms.size() == 1);
  CHECK(br.terms[0].k == 3);
  CHECK(br.terms[0].c == 1.0);
  CHECK(validate(qs.quotient()).pass);

  CHECK(qs.induced_ball().form() == GaugeForm::coordinate);
  CHECK(qs.induced_ball().coefficients() == std::vector<double>{1.0, 1.0, 1.0});
  CHECK(qs.induced_ball().exponents() == std::vector<double>{2.0, 2.0, 2.0});
}

TEST_CASE("induced ball truncates the parent ball") {
  GroupSpec g = free_nilpotent_2_3();
  GaugeBall coord(GaugeForm::coordinate, {1, 2, 3, 4, 5}, {2, 3, 4, 5, 6});
  QuotientSpec qs(g, coord);
  CHECK(qs.induced_ball().coefficients() == std::vector<double>{1, 2, 3});
  CHECK(qs.induced_ball().exponents() == std::vector<double>{2, 3, 4});

  GaugeBall layer(GaugeForm::layer, {1, 2, 3}, {2, 3, 4});
  QuotientSpec ql(g, layer);
  CHECK(ql.induced_ball().form() == GaugeForm::layer);
  CHECK(ql.induced_ball().coefficients() == std::vector<double>{1, 2});
  CHECK(ql.induced_ball().exponents() == std::vector<double>{2, 3});
}

TEST_CASE("quotient derivation requires a step-3 parent") {
  CHECK_THROWS_AS(derive_quotient(heisenberg1(), GaugeBall::euclidean(3)),
                  UnsupportedStepError);
  CHECK_THROWS_AS(derive_quotient(abelian({1, 1}), GaugeBall::euclidean(2)),
                  UnsupportedStepError);
}

TEST_CASE("projection drops the top layer and is a homomorphism") {
  QuotientSpec qs = canonical_quotient();
  PointD p(std::vector<double>{1, 2, 3, 4, 5});
  CHECK(project(qs, p).c == std::vector<double>{1, 2, 3});
  CHECK(project(qs, PointD::zero(5)).is_zero());

  Rng rng(13);
  const GroupSpec& g = qs.parent();
  for (int t = 0; t < 1000; ++t) {
    PointD a = rand_point(g, rng), b = rand_point(g, rng);
    PointD lhs = project(qs, multiply(g, a, b));
    PointD rhs = multiply(qs.quotient(), project(qs, a), project(qs, b));
    for (int i = 0; i < 3; ++i) CHECK(std::fabs(lhs.c[i] - rhs.c[i]) <= 1e-12);
  }
}

TEST_CASE("quotient distance: boundary, identity, and fiber monotonicity") {
  QuotientSpec qs = canonical_quotient();
  PointD e1(std::vector<double>{1, 0, 0});
  CHECK(quotient_from_origin(qs, e1) == Approx(1.0).epsilon(1e-12));
  Rng rng(19);
  for (int t = 0; t < 200; ++t) {
    PointD ph = rand_point(qs.quotient(), rng);
    CHECK(quotient_distance(qs, ph, ph) == 0.0);
  }
  // d_hat(0, project(p)) <= d(0, p): dropping coordinates never grows the gauge
  for (int t = 0; t < 1000; ++t) {
    PointD p = rand_point(qs.parent(), rng);
    if (p.is_zero()) continue;
    double dq = quotient_from_origin(qs, project(qs, p));
    double dp = qs.parent_qd().from_origin(p);
    CHECK(dq <= dp * (1.0 + 1e-10));
  }
}

TEST_CASE("definition route and induced-ball route agree") {
  for (const GaugeBall& ball :
       {GaugeBall::euclidean(5),
        GaugeBall(GaugeForm::coordinate, {1, 2, 3, 4, 5}, {2, 3, 4, 5, 6}),
        GaugeBall(GaugeForm::layer, {1.0, 0.5, 2.0}, {2.0, 3.0, 2.5})}) {
    QuotientSpec qs(free_nilpotent_2_3(), ball);
    Rng rng(23);
    for (int t = 0; t < 500; ++t) {
      PointD ph = rand_point(qs.quotient(), rng, 2.0);
      if (ph.is_zero()) continue;
      double via_parent = quotient_from_origin(qs, ph);
      double via_ball = qs.induced_qd().from_origin(ph);
      CHECK(via_parent == Approx(via_ball).epsilon(1e-11));
    }
  }
}

TEST_CASE("lift point: special cases and distance realization") {
  QuotientSpec qs = canonical_quotient();
  Rng rng(29);
  PointD qh = rand_point(qs.quotient(), rng);
  PointD lifted_from_origin = lift_point(qs, PointD::zero(5), qh);
  for (int i = 0; i < 3; ++i) CHECK(lifted_from_origin.c[i] == Approx(qh.c[i]).margin(1e-15));
  CHECK(lifted_from_origin.c[3] == 0.0);
  CHECK(lifted_from_origin.c[4] == 0.0);

  PointD p = rand_point(qs.parent(), rng);
  PointD same = lift_point(qs, p, project(qs, p));
  for (int i = 0; i < 5; ++i) CHECK(same.c[i] == Approx(p.c[i]).margin(1e-14));

  for (int t = 0; t < 1000; ++t) {
    PointD pp = rand_point(qs.parent(), rng);
    PointD qq = rand_point(qs.quotient(), rng);
    PointD lift = lift_point(qs, pp, qq);
    double dq = quotient_distance(qs, project(qs, pp), qq);
    double dl = qs.parent_qd().distance(pp, lift);
    CHECK(std::fabs(dl - dq) <= 1e-10 * std::max(dq, 1e-12));
    // the lift lands in the right fiber on the nose
    PointD back = project(qs, lift);
    for (int i = 0; i < 3; ++i) CHECK(std::fabs(back.c[i] - qq.c[i]) <= 1e-12);
  }
}

TEST_CASE("projection is 1-Lipschitz on random pairs") {
  QuotientSpec qs = canonical_quotient();
  Rng rng(31);
  for (int t = 0; t < 1000; ++t) {
    PointD p = rand_point(qs.parent(), rng), q = rand_point(qs.parent(), rng);
    double dp = qs.parent_qd().distance(p, q);
    double dq = quotient_distance(qs, project(qs, p), project(qs, q));
    CHECK(dq <= dp + 1e-10 * std::max(1.0, dp));
  }
}

TEST_CASE("sampled submetry check passes at 1e-9") {
  QuotientSpec qs = canonical_quotient();
  SubmetryReport rep = submetry_check(qs, 1000, 7);
  CHECK(rep.samples == 1000);
  CHECK(rep.max_subset_violation <= 1e-9);
  CHECK(rep.max_superset_violation <= 1e-9);
  CHECK(rep.max_lift_optimality_violation <= 1e-9);
  CHECK(rep.max_projection_mismatch <= 1e-9);
  CHECK(rep.pass(1e-9));
  CHECK_THROWS_AS(submetry_check(qs, 0, 7), DomainError);
}

TEST_CASE("quotient metric axioms and homogeneity under quotient dilations") {
  QuotientSpec qs = canonical_quotient();
  Rng rng(37);
  for (int t = 0; t < 500; ++t) {
    PointD a = rand_point(qs.quotient(), rng), b = rand_point(qs.quotient(), rng);
    double d1 = quotient_distance(qs, a, b);
    double d2 = quotient_distance(qs, b, a);
    CHECK(std::fabs(d1 - d2) <= 1e-10 * std::max(d1, 1e-12));
    bool same = true;
    for (int i = 0; i < 3; ++i) same = same && a.c[i] == b.c[i];
    if (!same) CHECK(d1 > 0.0);

    double lam = std::exp(rng.uniform(-1.5, 1.5));
    double ds = quotient_distance(qs, quotient_dilate(qs, lam, a), quotient_dilate(qs, lam, b));
    CHECK(std::fabs(ds - lam * d1) <= 1e-9 * std::max(lam * d1, 1e-12));
  }
}

TEST_CASE("quasi-triangle ratios transport through lifted configurations") {
  QuotientSpec qs = canonical_quotient();
  Rng rng(41);
  double worst_gap = 0.0;
  for (int t = 0; t < 500; ++t) {
    PointD ph = rand_point(qs.quotient(), rng), mh = rand_point(qs.quotient(), rng),
           qh = rand_point(qs.quotient(), rng);
    double den = quotient_distance(qs, ph, mh) + quotient_distance(qs, mh, qh);
    if (den <= 1e-9) continue;
    double ratio_q = quotient_distance(qs, ph, qh) / den;

    // lifted configuration realizing the same denominators upstairs
    PointD p = pad_zero(qs, ph);
    PointD mid = lift_point(qs, p, mh);
    PointD q = lift_point(qs, mid, qh);
    double den_up = qs.parent_qd().distance(p, mid) + qs.parent_qd().distance(mid, q);
    double ratio_up = qs.parent_qd().distance(p, q) / den_up;
    worst_gap = std::max(worst_gap, ratio_q - ratio_up);
  }
  CHECK(worst_gap <= 1e-9);
}

TEST_CASE("heisenberg restriction of the canonical quotient") {
  QuotientSpec qs = canonical_quotient();
  HeisenbergRestriction h = heisenberg_restriction(qs, 1, 2);
  CHECK(h.xi == std::vector<double>{1.0});
  // reversed orientation flips the bracket coordinate
  HeisenbergRestriction hr = heisenberg_restriction(qs, 2, 1);
  CHECK(hr.xi == std::vector<double>{-1.0});
  CHECK_THROWS_AS(heisenberg_restriction(qs, 1, 1), ShapeError);
  CHECK_THROWS_AS(heisenberg_restriction(qs, 1, 3), ShapeError);
}

TEST_CASE("embedded coordinates multiply by the closed-form law") {
  QuotientSpec qs = canonical_quotient();
  HeisenbergRestriction h = heisenberg_restriction(qs, 1, 2);
  Rng rng(43);
  for (int t = 0; t < 1000; ++t) {
    double x1 = rng.uniform(-2, 2), y1 = rng.uniform(-2, 2), z1 = rng.uniform(-2, 2);
    double x2 = rng.uniform(-2, 2), y2 = rng.uniform(-2, 2), z2 = rng.uniform(-2, 2);
    PointD prod = multiply(qs.quotient(), heisenberg_embed(qs, h, x1, y1, z1),
                           heisenberg_embed(qs, h, x2, y2, z2));
    PointD want = heisenberg_embed(qs, h, x1 + x2, y1 + y2,
                                   z1 + z2 + 0.5 * (x1 * y2 - x2 * y1));
    for (int i = 0; i < 3; ++i) CHECK(std::fabs(prod.c[i] - want.c[i]) <= 1e-12);
  }
}

TEST_CASE("restriction gauge matches the quotient gauge on embedded points") {
  QuotientSpec qs = canonical_quotient();
  HeisenbergRestriction h = heisenberg_restriction(qs, 1, 2);
  Rng rng(47);
  for (int t = 0; t < 1000; ++t) {
    double x = rng.uniform(-2, 2), y = rng.uniform(-2, 2), z = rng.uniform(-2, 2);
    double direct = gauge_value(qs.quotient(), qs.induced_ball(),
                                heisenberg_embed(qs, h, x, y, z));
    double through = restricted_gauge_value(qs, h, x, y, z);
    CHECK(std::fabs(direct - through) <= 1e-12);
    if (x != 0.0 || y != 0.0 || z != 0.0) {
      double d_restricted = restricted_from_origin(qs, h, x, y, z);
      double d_quotient = quotient_from_origin(qs, heisenberg_embed(qs, h, x, y, z));
      CHECK(d_restricted == Approx(d_quotient).epsilon(1e-10));
    }
  }
}

TEST_CASE("scaled bracket shows up in xi and the induced gauge") {
  // step-3 parent with [X1, X2] = 2 X3 and [X1, X3] = X4
  GroupSpec g(3, {2, 1, 1}, {{1, 2, {{3, 2.0}}}, {1, 3, {{4, 1.0}}}}, "scaled");
  REQUIRE(validate(g).pass);
  GaugeBall ball(GaugeForm::coordinate, {1, 1, 1, 1}, {2, 2, 2, 2});
  QuotientSpec qs(g, ball);
  HeisenbergRestriction h = heisenberg_restriction(qs, 1, 2);
  CHECK(h.xi == std::vector<double>{2.0});
  // z-term of the induced ball: c_3 |2 z|^2
  double v = restricted_gauge_value(qs, h, 0.0, 0.0, 0.5);
  CHECK(v == Approx(1.0).epsilon(1e-14));

  // degenerate bracket in the quotient
  GroupSpec deg(3, {2, 1, 1}, {{1, 3, {{4, 1.0}}}}, "degenerate");
  QuotientSpec qd(deg, ball);
  CHECK_THROWS_AS(heisenberg_restriction(qd, 1, 2), DomainError);
}

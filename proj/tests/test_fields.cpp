#include <cmath>
#include <sstream>

#include "doctest.h"
#include "hesslab/fields.hpp"
#include "oracles.hpp"

using namespace hesslab;

TEST_CASE("disc domain masks") {
  auto d = make_domain(ball_shape(1, 1.0), 0.05);
  double x[2];
  for (auto p : d->interior_nodes()) {
    d->coords(p, x);
    CHECK(x[0] * x[0] + x[1] * x[1] < 1.0);
  }
  for (auto p : d->boundary_nodes()) {
    d->coords(p, x);
    const double r = std::hypot(x[0], x[1]);
    CHECK(r >= 1.0 - 1e-9);
    CHECK(r < 1.0 + 1.5 * 0.05);
  }
  CHECK(d->interior_nodes().size() > 1200);
}

TEST_CASE("hartogs triangle and reinhardt masks follow the inequalities") {
  auto hd = make_domain(hartogs_shape(), 0.1);
  double x[8];
  for (auto p : hd->interior_nodes()) {
    hd->coords(p, x);
    const double z = std::hypot(x[0], x[1]), w = std::hypot(x[2], x[3]);
    CHECK(z < w);
    CHECK(w < 1);
  }
  auto rd = make_domain(reinhardt_shape(3, 2), 0.25);
  for (auto p : rd->interior_nodes()) {
    rd->coords(p, x);
    double a[3];
    for (int j = 0; j < 3; ++j) a[j] = x[2 * j] * x[2 * j] + x[2 * j + 1] * x[2 * j + 1];
    CHECK(a[0] < 1);
    CHECK(a[1] < 1);
    CHECK(a[2] < 1);
    CHECK(a[0] + a[1] - 0.5 * a[2] < 1);
  }
  // Every boundary node sits next to an interior node and outside the shape.
  for (auto p : rd->boundary_nodes()) {
    rd->coords(p, x);
    CHECK_FALSE(rd->shape().contains(x));
  }
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(make_domain(ball_shape(1, 0.01, {cplx(0.25, 0.25)}), 0.5), std::invalid_argument);
  CHECK_THROWS_AS(make_domain(ball_shape(1, 1.0), -0.1), std::invalid_argument);
  // On this lattice the only node with w = 0 is excluded, splitting the interior in two.
  Shape split = intersection_shape(hartogs_shape(), box_shape({-0.05, -0.05, -1, -0.05}, {0.05, 0.05, 1, 0.05}));
  CHECK_THROWS_AS(make_domain(split, 0.1), std::invalid_argument);
  Shape lens = intersection_shape(ball_shape(1, 0.6, {cplx(-0.3, 0)}), ball_shape(1, 0.6, {cplx(0.3, 0)}));
  CHECK_NOTHROW(make_domain(lens, 0.05));
  CHECK_NOTHROW(make_domain(product_shape(ball_shape(1, 1.0), ball_shape(1, 0.5)), 0.1));
}

TEST_CASE("closed form evaluations") {
  double p1[4] = {0.3, 0, 0.4, 0};
  CHECK(ClosedForm::sq_norm().eval(p1, 2) == doctest::Approx(0.25));
  double p2[4] = {0.3, 0, 0.6, 0};
  CHECK(ClosedForm::hartogs_exh().eval(p2, 2) == doctest::Approx(-0.27));
  double p3[6] = {0, 0, 0, 0, 1, 0};
  CHECK(ClosedForm::phi(2).eval(p3, 3) == doctest::Approx(-0.5));
  double p4[2] = {0, 0};
  CHECK(ClosedForm::log_abs(0).eval(p4, 1) <= kSentinel);
}

TEST_CASE("finite-difference Hessian is exact on quadratics") {
  auto d = make_domain(ball_shape(2, 1.0), 0.1);
  auto sq = eval_closed_form(ClosedForm::sq_norm(), d);
  auto re = eval_closed_form(ClosedForm::re_square(0), d);
  auto phi = eval_closed_form(ClosedForm::phi(1), d);
  HermitianForm a = HermitianForm::from_rows({{0.5, {0.2, -0.3}}, {{0.2, 0.3}, -0.1}});
  auto quad = eval_closed_form(ClosedForm::quadratic(a, 0.7), d);
  for (std::size_t i = 0; i < d->interior_nodes().size(); i += 17) {
    const auto p = d->interior_nodes()[i];
    auto hs = complex_hessian_fd(sq, p);
    auto hr = complex_hessian_fd(re, p);
    auto hp = complex_hessian_fd(phi, p);
    auto hq = complex_hessian_fd(quad, p);
    REQUIRE(hs);
    REQUIRE(hr);
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        CHECK(std::abs((*hs)(j, k) - (j == k ? 1.0 : 0.0)) < 1e-11);
        CHECK(std::abs((*hr)(j, k)) < 1e-11);
        CHECK(std::abs((*hq)(j, k) - a(j, k)) < 1e-11);
      }
    CHECK(std::abs((*hp)(1, 1) - (1.0 - 2.0)) < 1e-11);
  }
}

TEST_CASE("msh report on the phi_2 quadratic") {
  auto d = make_domain(reinhardt_shape(3, 2), 0.25);
  auto f = eval_closed_form(ClosedForm::phi(2), d);
  auto r1 = msh_report(f, 1);
  auto r2 = msh_report(f, 2);
  auto r3 = msh_report(f, 3);
  CHECK(r1.pass);
  CHECK(r2.pass);
  CHECK(r2.worst_margin >= -1e-9);
  CHECK_FALSE(r3.pass);
  CHECK(r3.worst_margin == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(r3.passed == 0);
}

TEST_CASE("msh report consistency with cone membership on quadratics") {
  auto d = make_domain(ball_shape(2, 1.0), 0.2);
  Rng rng(21);
  for (int t = 0; t < 40; ++t) {
    auto a = random_hermitian(2, rng);
    auto f = eval_closed_form(ClosedForm::quadratic(a), d);
    for (int m = 1; m <= 2; ++m) {
      const auto cone = gamma_membership(a, m, 1e-9);
      const auto rep = msh_report(f, m);
      CHECK(rep.pass == cone.member);
      if (rep.pass) CHECK(msh_report(f, 1).pass);
    }
  }
}

TEST_CASE("constant field passes with zero margin and strict mode detects the shift") {
  auto d = make_domain(ball_shape(2, 1.0), 0.2);
  auto c = make_field(d, -3.0);
  auto r = msh_report(c, 2);
  CHECK(r.pass);
  CHECK(std::abs(r.worst_margin) < 1e-9);
  auto sq = eval_closed_form(ClosedForm::sq_norm(), d);
  MshOptions strict;
  strict.strict_c = 0.5;
  CHECK(msh_report(sq, 2, strict).pass);
  strict.strict_c = 1.5;
  CHECK_FALSE(msh_report(sq, 1, strict).pass);
}

TEST_CASE("random alpha positivity agrees with cone membership") {
  auto d = make_domain(ball_shape(2, 1.0), 0.25);
  auto f = eval_closed_form(ClosedForm::quadratic(HermitianForm::diagonal({1, -1})), d);
  MshOptions opts;
  opts.random_alpha_count = 32;
  auto r = msh_report(f, 2, opts);
  REQUIRE(r.worst_positivity);
  CHECK(*r.worst_positivity < 0);
  auto g = eval_closed_form(ClosedForm::quadratic(HermitianForm::diagonal({1, 0.2})), d);
  auto rg = msh_report(g, 2, opts);
  CHECK(*rg.worst_positivity >= -1e-9);
}

TEST_CASE("hartogs exhaustion at a coarse grid") {
  auto d = make_domain(hartogs_shape(), 0.05);
  auto f = eval_closed_form(ClosedForm::hartogs_exh(), d);
  MshOptions opts;
  opts.tol = 1e-6;
  auto r = msh_report(f, 1, opts);
  CHECK(r.pass);
  CHECK(r.worst_margin >= -1e-6);
  auto ex = exhaustion_report(f);
  CHECK(ex.negativity_ok);
  CHECK(ex.band_sup >= -4 * 0.05);
  CHECK(ex.levels_ok);
}

TEST_CASE("exhaustion reports") {
  auto d = make_domain(ball_shape(2, 1.0), 0.1);
  auto f = eval_closed_form(ClosedForm::affine(-1.0, {{1.0, ClosedForm::sq_norm()}}), d);
  auto r = exhaustion_report(f);
  CHECK(r.pass);
  CHECK(r.band_sup <= 0);
  CHECK(r.band_sup >= -2 * 0.1 * 2.0);
  for (size_t i = 1; i < r.levels.size(); ++i) CHECK(r.levels[i].distance >= r.levels[i - 1].distance);
  auto c = make_field(d, -1.0);
  auto rc = exhaustion_report(c);
  CHECK_FALSE(rc.pass);
  CHECK_FALSE(rc.boundary_ok);
}

TEST_CASE("combine operations") {
  auto d = make_domain(ball_shape(2, 1.0), 0.125);
  auto u = eval_closed_form(ClosedForm::sq_norm(), d);
  auto v = eval_closed_form(ClosedForm::quadratic(HermitianForm::diagonal({2, 0.1}), -0.3), d);
  auto same = combine({CombineOp::max}, u, u);
  for (auto p : d->interior_nodes()) CHECK(same.values[p] == u.values[p]);
  CombineSpec aff{CombineOp::affine, 1.0, 1.0};
  CHECK(msh_report(combine(aff, u, v), 2).pass);
  auto mx = combine({CombineOp::max}, u, v);
  CHECK(msh_report(mx, 1).pass);
  CHECK(msh_report(mx, 2).pass);
  CombineSpec neg{CombineOp::affine, -1.0, 1.0};
  CHECK_THROWS_AS(combine(neg, u, v), std::invalid_argument);
}

TEST_CASE("glue reproduces the hartogs exhaustion from its pieces") {
  auto d = make_domain(hartogs_shape(), 0.1);
  auto lg = eval_closed_form(ClosedForm::log_abs(1), d);
  auto quad = eval_closed_form(ClosedForm::quadratic(HermitianForm::diagonal({1, -1})), d);
  auto ref = eval_closed_form(ClosedForm::hartogs_exh(), d);
  std::vector<std::uint8_t> omega(d->size(), 0);
  for (auto p : d->interior_nodes()) omega[p] = quad.values[p] >= lg.values[p] - 0.5;
  CombineSpec glue{CombineOp::glue};
  glue.omega = &omega;
  glue.tol = 1e-12;
  auto g = combine(glue, lg, quad);
  for (auto p : d->interior_nodes()) CHECK(g.values[p] == doctest::Approx(ref.values[p]).epsilon(1e-14));

  std::vector<std::uint8_t> bad(d->size(), 0);
  double x[4] = {0, 0, 0.1, 0.5};
  bad[d->nearest_node(x)] = 1;
  glue.omega = &bad;
  CHECK_THROWS_AS(combine(glue, lg, quad), std::invalid_argument);
}

TEST_CASE("regularized max") {
  CHECK(regularized_max(1.0, 0.0, 0.05) == 1.0);
  CHECK(regularized_max(0.3, 0.3, 0.2) == doctest::Approx(0.35));
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    const double u = rng.uniform(-1, 1), v = rng.uniform(-1, 1), eta = rng.uniform(0.01, 0.5);
    const double m = regularized_max(u, v, eta);
    CHECK(m >= std::max(u, v));
    CHECK(m == doctest::Approx(regularized_max(v, u, eta)).epsilon(1e-14));
    if (std::abs(u - v) > eta) CHECK(m == std::max(u, v));
  }
  auto d = make_domain(ball_shape(2, 1.0), 0.125);
  auto a = eval_closed_form(ClosedForm::sq_norm(), d);
  auto b = eval_closed_form(ClosedForm::quadratic(HermitianForm::diagonal({3, 0.2}), -0.2), d);
  auto s = regularized_max(a, b, 0.1);
  CHECK(msh_report(s, 2).pass);
}

TEST_CASE("mollifier normalization and fixed points") {
  for (int n = 1; n <= 3; ++n) {
    // Independent check: trapezoid rule in t = r^2 on a fine grid.
    const double cn = mollifier_constant(n);
    const int steps = 200000;
    double fact = 1;
    for (int i = 2; i < n; ++i) fact *= i;
    const double sphere = 2 * std::pow(M_PI, n) / fact;
    double s = 0;
    for (int i = 1; i < steps; ++i) {
      const double r = static_cast<double>(i) / steps;
      s += mollifier_profile(r * r) * std::pow(r, 2 * n - 1);
    }
    CHECK(std::abs(cn * sphere * s / steps - 1.0) < 1e-6);
  }
  auto d = make_domain(ball_shape(2, 1.0), 0.1);
  auto c = make_field(d, 2.5);
  auto m = mollify(c, {0.2, 2});
  CHECK(std::abs(m.kernel_sum - 1.0) < 1e-12);
  std::size_t inside = 0;
  for (auto p : d->interior_nodes())
    if (m.shrunken[p]) {
      CHECK(m.field.values[p] == doctest::Approx(2.5).epsilon(1e-14));
      ++inside;
    }
  CHECK(inside > 0);
  CHECK_THROWS_AS(mollify(c, {0.05, 2}), std::invalid_argument);
  CHECK_THROWS_AS(mollify(c, {1.5, 2}), std::invalid_argument);
}

TEST_CASE("mollified m-sh field stays m-sh") {
  auto d = make_domain(ball_shape(2, 1.0), 0.1);
  auto a = eval_closed_form(ClosedForm::sq_norm(), d);
  auto b = eval_closed_form(ClosedForm::quadratic(HermitianForm::diagonal({2, 0.3}), -0.1), d);
  auto mx = combine({CombineOp::max}, a, b);
  auto m = mollify(mx, {0.25, 2});
  MshOptions opts;
  opts.region = &m.shrunken;
  auto r = msh_report(m.field, 2, opts);
  CHECK(r.evaluated > 0);
  CHECK(r.worst_margin >= -1e-9);
}

TEST_CASE("field dump round trip and CSV columns") {
  auto d = make_domain(ball_shape(1, 1.0), 0.25);
  auto f = eval_closed_form(ClosedForm::sq_norm(), d);
  std::stringstream ss;
  write_field_dump(ss, f);
  auto back = read_field_dump(ss, d);
  for (std::size_t i = 0; i < d->size(); ++i)
    if (d->masked(i)) CHECK(back.values[i] == f.values[i]);
  MshOptions opts;
  opts.keep_points = true;
  auto rep = msh_report(f, 1, opts);
  std::stringstream csv;
  write_msh_csv(csv, rep);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "point,margin,sigma_1");
  auto other = make_domain(ball_shape(1, 1.0), 0.2);
  std::stringstream again;
  write_field_dump(again, f);
  CHECK_THROWS_AS(read_field_dump(again, other), std::invalid_argument);
}

#include <cmath>

#include "doctest.h"
#include "hesslab/envelopes.hpp"
#include "hesslab/hessian_measure.hpp"
#include "oracles.hpp"

using namespace hesslab;

TEST_CASE("squared norm has unit density and scales like s^m") {
  auto d = make_domain(ball_shape(2, 1.0), 0.1);
  for (int m = 1; m <= 2; ++m) {
    auto md = hessian_density(eval_closed_form(ClosedForm::sq_norm(), d), m);
    REQUIRE(md.defined > 0);
    for (auto p : d->interior_nodes())
      if (std::isfinite(md.density[p])) CHECK(md.density[p] == doctest::Approx(1.0).epsilon(1e-9));
    const double s = 2.5;
    auto scaled = eval_closed_form(ClosedForm::affine(0, {{s, ClosedForm::sq_norm()}}), d);
    auto ms = hessian_density(scaled, m);
    CHECK(ms.total_mass == doctest::Approx(std::pow(s, m) * md.total_mass).epsilon(1e-9));
  }
}

TEST_CASE("density of Hermitian quadratics is sigma_m / C(n, m)") {
  auto d = make_domain(ball_shape(2, 1.0), 0.125);
  Rng rng(17);
  for (int t = 0; t < 10; ++t) {
    auto a = random_hermitian(2, rng);
    auto f = eval_closed_form(ClosedForm::quadratic(a), d);
    for (int m = 1; m <= 2; ++m) {
      const double expect = oracle::sigma(oracle::eigenvalues(a), m) / binomial(2, m);
      auto md = hessian_density(f, m);
      std::size_t seen = 0;
      for (auto p : d->interior_nodes())
        if (std::isfinite(md.density[p])) {
          CHECK(md.density[p] == doctest::Approx(expect).epsilon(1e-8));
          ++seen;
        }
      CHECK(seen > 0);
    }
  }
}

TEST_CASE("m = 1 density matches the axis Laplacian") {
  // For m = 1 the density is tr(A) / n = Laplacian / (4 n).
  auto d = make_domain(ball_shape(2, 1.0), 0.1);
  Rng rng(23);
  auto a = random_hermitian(2, rng);
  auto f = eval_closed_form(ClosedForm::quadratic(a), d);
  auto md = hessian_density(f, 1);
  const double h = d->h();
  for (auto p : d->interior_nodes()) {
    if (!std::isfinite(md.density[p])) continue;
    double lap = 0;
    for (int k = 0; k < d->dims(); ++k) {
      const std::int64_t o = d->stride(k);
      lap += (f.values[p + o] - 2 * f.values[p] + f.values[p - o]) / (h * h);
    }
    CHECK(md.density[p] == doctest::Approx(lap / (4 * d->n())).epsilon(1e-8));
  }
}

TEST_CASE("total mass of |z|^2 approximates the ball volume") {
  // Volume of the unit ball in C^2 is pi^2 / 2.
  auto d = make_domain(ball_shape(2, 1.0), 0.1);
  auto md = hessian_density(eval_closed_form(ClosedForm::sq_norm(), d), 2);
  const double vol = M_PI * M_PI / 2;
  CHECK(std::abs(md.total_mass - vol) <= md.quadrature_error + 1e-9);
  auto half = half_size_region(*d);
  CHECK(total_mass(md, &half) < md.total_mass);
}

TEST_CASE("membership of exhaustions") {
  auto d = make_domain(ball_shape(2, 1.0), 0.1);
  auto good = eval_closed_form(ClosedForm::affine(-1, {{1, ClosedForm::sq_norm()}}), d);
  auto r = e0_membership(good, 2, 1e-8);
  CHECK(r.pass);
  CHECK(r.items.size() == 5);

  auto positive = eval_closed_form(ClosedForm::affine(0.5, {{1, ClosedForm::sq_norm()}}), d);
  auto rp = e0_membership(positive, 2, 1e-8);
  CHECK_FALSE(rp.pass);
  CHECK_FALSE(rp.items[0].pass);

  // Not 2-subharmonic: |z_1|^2 - 2|z_2|^2 - 3.
  auto bad = eval_closed_form(ClosedForm::quadratic(HermitianForm::diagonal({1, -2}), -3), d);
  auto rb = e0_membership(bad, 2, 1e-8);
  CHECK_FALSE(rb.pass);
  bool msh_failed = false;
  for (const auto& it : rb.items)
    if (it.name == "m_subharmonic") msh_failed = !it.pass;
  CHECK(msh_failed);
}

TEST_CASE("max crease keeps density nonnegative") {
  auto d = make_domain(ball_shape(2, 1.0), 0.1);
  auto u = eval_closed_form(ClosedForm::affine(-0.5, {{1, ClosedForm::sq_norm()}}), d);
  auto v = eval_closed_form(ClosedForm::affine(-0.25, {{0.5, ClosedForm::sq_norm()}}), d);
  auto w = combine({}, u, v);
  auto md = hessian_density(w, 2);
  CHECK(md.crease_points > 0);
  for (auto p : d->interior_nodes())
    if (std::isfinite(md.density[p])) CHECK(md.density[p] >= -1e-9);
}

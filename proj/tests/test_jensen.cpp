#include <cmath>
#include <sstream>

#include "doctest.h"
#include "hesslab/jensen.hpp"
#include "oracles.hpp"

using namespace hesslab;

namespace {

DomainPtr disc(double h = 0.125) { return make_domain(ball_shape(1, 1.0), h); }

TestFamily disc_family(DomainPtr d, int quadratics = 10) {
  FamilySpec fs;
  fs.quadratic_count = quadratics;
  return build_test_family(d, 1, fs);
}

GridField random_field(DomainPtr d, Rng& rng) {
  GridField g = make_field(d, 0.0);
  for (auto p : masked_nodes(*d)) g.values[p] = rng.uniform(-1, 1);
  return g;
}

// Sup side solved by the oracle: max sum_k l_k u_k(z) with sum_k l_k u_k <= g
// on the masked nodes. The constants +-1 let g be shifted to positive values.
double oracle_sup(std::uint32_t z, const GridField& g, const TestFamily& fam) {
  const auto nodes = masked_nodes(*fam.domain);
  const int k = static_cast<int>(fam.members.size()), m = static_cast<int>(nodes.size());
  double lo = INFINITY;
  for (auto p : nodes) lo = std::min(lo, g[p]);
  const double shift = 1 - lo;
  Eigen::MatrixXd a(m, k);
  Eigen::VectorXd b(m), c(k);
  for (int i = 0; i < m; ++i) {
    b[i] = g[nodes[i]] + shift;
    for (int j = 0; j < k; ++j) a(i, j) = fam.members[j].field[nodes[i]];
  }
  for (int j = 0; j < k; ++j) c[j] = fam.members[j].field[z];
  const auto r = oracle::max_le(a, b, c);
  REQUIRE(r.optimal);
  return r.value - shift;
}

}  // namespace

TEST_CASE("test family layout") {
  auto d = disc();
  auto fam = disc_family(d);
  REQUIRE(fam.members.size() == 20);
  CHECK(fam.members[0].field[d->interior_nodes()[0]] == 1.0);
  CHECK(fam.members[1].field[d->interior_nodes()[0]] == -1.0);
  for (const auto& mem : fam.members) CHECK(mem.certified_margin >= -1e-8);

  FamilySpec fs;
  auto bad = eval_closed_form(ClosedForm::affine(0, {{-1, ClosedForm::sq_norm()}}), d);
  fs.extra.push_back({"concave", bad, false});
  CHECK_THROWS(build_test_family(d, 1, fs));
}

TEST_CASE("Edwards duality against the oracle") {
  auto d = disc();
  auto fam = disc_family(d);
  const auto nodes = masked_nodes(*d);
  Rng rng(7);
  for (int t = 0; t < 10; ++t) {
    const auto z = nodes[rng.next() % nodes.size()];
    const auto g = random_field(d, rng);
    auto r = edwards_gap(z, g, fam);
    CHECK(r.within_tol);
    CHECK(std::abs(r.gap) <= 1e-8);
    const double ref = oracle_sup(z, g, fam);
    CHECK(r.inf_side == doctest::Approx(ref).epsilon(1e-8));
    CHECK(r.sup_side == doctest::Approx(ref).epsilon(1e-8));
    // The point mass is always admissible.
    CHECK(r.inf_side <= g[z] + 1e-9);
  }
}

TEST_CASE("Jensen measures are probability measures with the right barycenter") {
  auto d = disc();
  auto fam = disc_family(d);
  Rng rng(5);
  const auto g = random_field(d, rng);
  const auto z = d->interior_nodes()[d->interior_nodes().size() / 3];
  auto r = jensen_lp_min(z, g, fam);
  double mass = 0, bx = 0, by = 0, val = 0;
  double x[2], zx[2];
  d->coords(z, zx);
  for (std::size_t i = 0; i < r.measure.support.size(); ++i) {
    const double w = r.measure.weights[i];
    CHECK(w >= -1e-12);
    d->coords(r.measure.support[i], x);
    mass += w;
    bx += w * x[0];
    by += w * x[1];
    val += w * g[r.measure.support[i]];
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
  // +-Re z and +-Im z pin the barycenter.
  CHECK(bx == doctest::Approx(zx[0]).epsilon(1e-9));
  CHECK(by == doctest::Approx(zx[1]).epsilon(1e-9));
  CHECK(val == doctest::Approx(r.value).epsilon(1e-9));
  for (const auto& mem : fam.members) {
    double s = 0;
    for (std::size_t i = 0; i < r.measure.support.size(); ++i) s += r.measure.weights[i] * mem.field[r.measure.support[i]];
    CHECK(s >= mem.field[z] - 1e-9);
  }

  std::ostringstream os;
  write_measure_csv(os, r.measure);
  CHECK(os.str().rfind("node,weight\n", 0) == 0);
}

TEST_CASE("a member as the test function gives its own value") {
  auto d = disc();
  auto fam = disc_family(d);
  for (std::size_t k = 2; k < fam.members.size(); k += 5) {
    const auto z = d->interior_nodes()[(k * 37) % d->interior_nodes().size()];
    auto r = jensen_lp_min(z, fam.members[k].field, fam);
    CHECK(r.value == doctest::Approx(fam.members[k].field[z]).epsilon(1e-9));
  }
}

TEST_CASE("more members give larger Jensen values") {
  auto d = disc();
  auto small = disc_family(d, 2);
  auto large = disc_family(d, 10);
  Rng rng(9);
  const auto g = random_field(d, rng);
  for (int t = 0; t < 5; ++t) {
    const auto z = d->interior_nodes()[rng.next() % d->interior_nodes().size()];
    CHECK(jensen_lp_min(z, g, small).value <= jensen_lp_min(z, g, large).value + 1e-9);
  }
}

TEST_CASE("boundary mass profile respects the exhaustion bound") {
  auto d = disc(0.2);
  FamilySpec fs;
  fs.quadratic_count = 4;
  fs.extra.push_back({"exhaustion", eval_closed_form(ClosedForm::affine(-1, {{1, ClosedForm::sq_norm()}}), d), true});
  auto fam = build_test_family(d, 1, fs);
  auto rep = boundary_mass_profile(fam);
  CHECK(rep.bound_ok);
  CHECK(rep.entries.size() == d->boundary_nodes().size());
  for (const auto& e : rep.entries) {
    REQUIRE(e.bound);
    CHECK(e.interior_mass <= *e.bound + 1e-9);
  }
}

TEST_CASE("boundary scan reports nonpositive slack") {
  auto d = disc(0.25);
  auto fam = disc_family(d, 4);
  auto rep = jensen_boundary_scan(fam);
  for (const auto& e : rep.entries) CHECK(e.slack <= 1e-9);
  std::size_t interior_trivial = 0;
  for (auto n : rep.trivial_nodes) interior_trivial += d->interior(n);
  CHECK(interior_trivial == 0);
  std::ostringstream os;
  write_scan_csv(os, rep);
  CHECK(os.str().rfind("node,slack,trivial\n", 0) == 0);
}

TEST_CASE("boundary extension on the disc") {
  auto d = disc(0.125);
  auto fam = disc_family(d, 6);
  auto f = eval_closed_form(ClosedForm::re_linear(0, 1.0), d);
  auto r = boundary_extension_check(f, fam);
  CHECK(r.verdict == Verdict::pass);
  for (auto p : d->interior_nodes()) CHECK(r.extension[p] == doctest::Approx(f[p]).epsilon(1e-6));
}

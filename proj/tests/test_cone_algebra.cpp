#include <cmath>

#include "doctest.h"
#include "hesslab/cone_algebra.hpp"
#include "oracles.hpp"

using namespace hesslab;

namespace {

HermitianForm residual_check_form() {
  return HermitianForm::from_rows({{2.0, {0.3, -0.7}, {0.1, 0.2}},
                                   {{0.3, 0.7}, -1.0, {0.5, 0.0}},
                                   {{0.1, -0.2}, {0.5, 0.0}, 0.25}});
}

}  // namespace

TEST_CASE("eigenvalues of catalogue forms") {
  auto d = eigenvalues_hermitian(HermitianForm::diagonal({3, 1, 2})).eigenvalues;
  CHECK(d == std::vector<double>{1, 2, 3});

  auto two = eigenvalues_hermitian(HermitianForm::from_rows({{2.0, {0, 1}}, {{0, -1}, 2.0}})).eigenvalues;
  CHECK(two[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(two[1] == doctest::Approx(3.0).epsilon(1e-14));

  auto id = eigenvalues_hermitian(HermitianForm::identity(4)).eigenvalues;
  for (double x : id) CHECK(x == 1.0);
}

TEST_CASE("jacobi factorization reconstructs the form") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 4;
    HermitianForm h = trial == 0 ? residual_check_form() : random_hermitian(n, rng);
    auto dec = jacobi_eigen(h);
    double res = 0;
    for (int j = 0; j < h.n(); ++j)
      for (int k = 0; k < h.n(); ++k) {
        cplx s = 0;
        for (int q = 0; q < h.n(); ++q)
          s += dec.vectors[j * kMaxDim + q] * dec.spectrum.eigenvalues[q] * std::conj(dec.vectors[k * kMaxDim + q]);
        res += std::norm(s - h(j, k));
      }
    CHECK(std::sqrt(res) <= 1e-12 * h.frobenius_norm());
    auto ref = oracle::eigenvalues(h);
    double sum = 0;
    for (int j = 0; j < h.n(); ++j) {
      CHECK(dec.spectrum.eigenvalues[j] == doctest::Approx(ref[j]).epsilon(1e-12));
      sum += dec.spectrum.eigenvalues[j];
    }
    CHECK(sum == doctest::Approx(h.trace()).epsilon(1e-12));
  }
}

TEST_CASE("non-Hermitian input is rejected") {
  HermitianForm h(2);
  h(0, 1) = 1.0;
  CHECK_THROWS_AS(eigenvalues_hermitian(h), std::invalid_argument);
  CHECK_THROWS_AS(HermitianForm::from_rows({{1.0, 2.0}, {3.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("elementary symmetric functions") {
  CHECK(elementary_symmetric(2, Spectrum{{1, 1, 1}}) == 3.0);
  Spectrum s{{1, 1, -0.5}};
  CHECK(elementary_symmetric(1, s) == doctest::Approx(1.5));
  CHECK(std::abs(elementary_symmetric(2, s)) < 1e-15);
  CHECK(elementary_symmetric(3, s) == doctest::Approx(-0.5));
  CHECK(elementary_symmetric(1, Spectrum{{0.25, -3, 7}}) == doctest::Approx(4.25));
  CHECK_THROWS_AS(elementary_symmetric(0, s), std::invalid_argument);
  CHECK_THROWS_AS(elementary_symmetric(4, s), std::invalid_argument);

  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    HermitianForm h = random_hermitian(4, rng);
    auto minors = sigma_from_minors(h);
    auto lam = oracle::eigenvalues(h);
    for (int k = 1; k <= 4; ++k) CHECK(minors[k - 1] == doctest::Approx(oracle::sigma(lam, k)).epsilon(1e-10));
  }
}

TEST_CASE("gamma membership examples") {
  for (int n = 1; n <= 4; ++n)
    for (int m = 1; m <= n; ++m) {
      auto r = gamma_membership(HermitianForm::identity(n), m);
      CHECK(r.member);
      int smallest = binomial(n, 1);
      for (int k = 1; k <= m; ++k) smallest = std::min(smallest, binomial(n, k));
      CHECK(r.margin == doctest::Approx(smallest));
    }
  auto phi = HermitianForm::diagonal({1, 1, -0.5});
  auto r2 = gamma_membership(phi, 2);
  CHECK(r2.member);
  CHECK(r2.sigma_values[0] == doctest::Approx(1.5));
  CHECK(std::abs(r2.sigma_values[1]) < 1e-12);
  auto r3 = gamma_membership(phi, 3);
  CHECK_FALSE(r3.member);
  CHECK(r3.margin == doctest::Approx(-0.5));

  auto hyp = HermitianForm::diagonal({1, -1});
  auto h1 = gamma_membership(hyp, 1);
  CHECK(h1.member);
  CHECK(h1.margin == 0.0);
  auto h2 = gamma_membership(hyp, 2);
  CHECK_FALSE(h2.member);
  CHECK(h2.margin == doctest::Approx(-1.0));

  auto edge = gamma_membership(HermitianForm::diagonal({1, -1 - 1e-10}), 1);
  CHECK(edge.member);
  CHECK(edge.closure);
  CHECK_THROWS_AS(gamma_membership(hyp, 3), std::invalid_argument);
}

TEST_CASE("mixed discriminant normalization and closed forms") {
  for (int n = 1; n <= 4; ++n) {
    std::vector<HermitianForm> ids(n, HermitianForm::identity(n));
    CHECK(mixed_form_coefficient(ids) == doctest::Approx(1.0).epsilon(1e-14));
  }
  auto a = HermitianForm::diagonal({2, 5}), b = HermitianForm::diagonal({-1, 3});
  CHECK(mixed_form_coefficient({a, b}) == doctest::Approx((2.0 * 3 + 5.0 * -1) / 2));

  for (int n = 1; n <= 4; ++n)
    for (int m = 0; m <= n; ++m) {
      std::vector<HermitianForm> f(m, HermitianForm::identity(n) * 1.7);
      while (static_cast<int>(f.size()) < n) f.push_back(HermitianForm::identity(n));
      CHECK(mixed_form_coefficient(f) == doctest::Approx(std::pow(1.7, m)).epsilon(1e-13));
    }
  CHECK_THROWS_AS(mixed_form_coefficient({HermitianForm::identity(3)}), std::invalid_argument);
}

TEST_CASE("mixed discriminant agrees with the permutation expansion") {
  Rng rng(3);
  for (int t = 0; t < 60; ++t) {
    const int n = 1 + t % 4;
    std::vector<HermitianForm> f;
    for (int i = 0; i < n; ++i) f.push_back(random_hermitian(n, rng));
    CHECK(mixed_form_coefficient(f) == doctest::Approx(oracle::mixed_discriminant(f)).epsilon(1e-12));
    // Repeated argument reduces to sigma_m / C(n, m).
    for (int m = 1; m <= n; ++m) {
      std::vector<HermitianForm> g(m, f[0]);
      while (static_cast<int>(g.size()) < n) g.push_back(HermitianForm::identity(n));
      const double expect = oracle::sigma(oracle::eigenvalues(f[0]), m) / binomial(n, m);
      CHECK(mixed_form_coefficient(g) == doctest::Approx(expect).epsilon(1e-11));
    }
  }
}

TEST_CASE("positivity test examples") {
  auto hyp = HermitianForm::diagonal({1, -1});
  CHECK(std::abs(definition_positivity_test(hyp, {HermitianForm::identity(2)}, 2)) < 1e-15);
  CHECK(definition_positivity_test(hyp, {HermitianForm::diagonal({2, 0.5})}, 2) == doctest::Approx(-0.75));
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    auto alpha = random_gamma_member(3, 3, rng);
    CHECK(definition_positivity_test(HermitianForm::identity(3), {alpha, alpha}, 3) >= 0);
  }
  CHECK_THROWS_AS(definition_positivity_test(hyp, {hyp}, 2), std::invalid_argument);
  CHECK_THROWS_AS(definition_positivity_test(hyp, {}, 2), std::invalid_argument);
}

TEST_CASE("linearization matches the mixed discriminant") {
  Rng rng(9);
  for (int t = 0; t < 30; ++t) {
    const int n = 2 + t % 3;
    std::vector<HermitianForm> alphas{random_hermitian(n, rng)};
    auto a = linearize_mixed(n, alphas);
    CHECK(a.is_hermitian(1e-12));
    HermitianForm h = random_hermitian(n, rng);
    double tr = 0;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) tr += (a(k, j) * h(j, k)).real();
    std::vector<HermitianForm> slots{h, alphas[0]};
    while (static_cast<int>(slots.size()) < n) slots.push_back(HermitianForm::identity(n));
    CHECK(tr == doctest::Approx(mixed_form_coefficient(slots)).epsilon(1e-12));
  }
}

TEST_CASE("dual cone samples") {
  auto one = dual_cone_sample(3, 1, 10, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0](0, 0).real() == doctest::Approx(1.0 / 3));

  for (int n = 2; n <= 4; ++n)
    for (int m = 2; m <= n; ++m) {
      auto s = dual_cone_sample(n, m, 16, 42);
      CHECK(s.size() == 17);
      for (const auto& a : s) {
        CHECK(a.trace() == doctest::Approx(1.0));
        CHECK(oracle::min_eigenvalue(a) >= -1e-12);
      }
      auto again = dual_cone_sample(n, m, 16, 42);
      for (size_t i = 0; i < s.size(); ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) CHECK(s[i](j, k) == again[i](j, k));
    }

  // For n = 2 the linearization is proportional to the adjugate of alpha.
  Rng rng(42);
  auto alpha = random_gamma_member(2, 2, rng);
  auto lin = linearize_mixed(2, {alpha});
  CHECK(lin(0, 0).real() == doctest::Approx(alpha(1, 1).real() / 2));
  CHECK(std::abs(lin(0, 1) + alpha(0, 1) / 2.0) < 1e-14);
}

TEST_CASE("plain-text form serialization round trip") {
  Rng rng(13);
  auto h = random_hermitian(3, rng);
  auto text = serialize_form(h);
  auto back = parse_form(text);
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) CHECK(back(j, k) == h(j, k));
  CHECK(text.rfind("hermitian 3\n", 0) == 0);
  CHECK_THROWS_AS(parse_form("matrix 2\n"), std::invalid_argument);
}

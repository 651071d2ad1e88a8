#include <cmath>

#include "doctest.h"
#include "hesslab/simplex.hpp"
#include "oracles.hpp"

using namespace hesslab;

TEST_CASE("random packing LPs agree with the revised-simplex oracle") {
  Rng rng(3);
  for (int t = 0; t < 60; ++t) {
    const int m = 3 + t % 17, n = 2 + (t * 7) % 13;
    Eigen::MatrixXd a(m, n);
    Eigen::VectorXd b(m), c(n);
    LpProblem p;
    for (int j = 0; j < n; ++j) c[j] = rng.uniform(-1, 2);
    for (int i = 0; i < m; ++i) {
      std::vector<double> row(n);
      for (int j = 0; j < n; ++j) row[j] = a(i, j) = rng.uniform(-0.5, 1.5);
      b[i] = rng.uniform(0.5, 3);
      p.add_row(row, RowSense::le, b[i]);
    }
    // Box rows keep both problems bounded.
    for (int j = 0; j < n; ++j) {
      std::vector<double> row(n, 0.0);
      row[j] = 1;
      p.add_row(row, RowSense::le, 5);
    }
    Eigen::MatrixXd ab(m + n, n);
    ab << a, Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd bb(m + n);
    bb << b, Eigen::VectorXd::Constant(n, 5);
    for (int j = 0; j < n; ++j) p.cost.push_back(-c[j]);
    const auto ref = oracle::max_le(ab, bb, c);
    REQUIRE(ref.optimal);
    const auto got = solve_lp(p);
    REQUIRE(got.status == LpStatus::optimal);
    CHECK(-got.value == doctest::Approx(ref.value).epsilon(1e-9));
    for (int i = 0; i < m + n; ++i) {
      double lhs = 0;
      for (int j = 0; j < n; ++j) lhs += ab(i, j) * got.x[j];
      CHECK(lhs <= bb[i] + 1e-9);
    }
  }
}

TEST_CASE("equality and covering rows") {
  // min x + 2y  s.t.  x + y = 1, x - y >= -0.5
  LpProblem p;
  p.cost = {1, 2};
  p.add_row({1, 1}, RowSense::eq, 1);
  p.add_row({1, -1}, RowSense::ge, -0.5);
  auto r = solve_lp(p);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.value == doctest::Approx(1.0));
  CHECK(r.x[0] == doctest::Approx(1.0));

  // min -x s.t. x + y = 1, y >= 0.25  -> x = 0.75
  LpProblem q;
  q.cost = {-1, 0};
  q.add_row({1, 1}, RowSense::eq, 1);
  q.add_row({0, 1}, RowSense::ge, 0.25);
  auto s = solve_lp(q);
  REQUIRE(s.status == LpStatus::optimal);
  CHECK(s.x[0] == doctest::Approx(0.75));
}

TEST_CASE("infeasible and unbounded problems") {
  LpProblem p;
  p.cost = {1};
  p.add_row({1}, RowSense::le, 1);
  p.add_row({1}, RowSense::ge, 2);
  CHECK(solve_lp(p).status == LpStatus::infeasible);

  LpProblem q;
  q.cost = {-1, 0};
  q.add_row({1, -1}, RowSense::le, 1);
  CHECK(solve_lp(q).status == LpStatus::unbounded);
}

TEST_CASE("degenerate cycling example terminates") {
  // Beale's example: Dantzig's rule alone cycles on it.
  LpProblem p;
  p.cost = {-0.75, 150, -0.02, 6};
  p.add_row({0.25, -60, -0.04, 9}, RowSense::le, 0);
  p.add_row({0.5, -90, -0.02, 3}, RowSense::le, 0);
  p.add_row({0, 0, 1, 0}, RowSense::le, 1);
  auto r = solve_lp(p);
  REQUIRE(r.status == LpStatus::optimal);
  CHECK(r.value == doctest::Approx(-0.05));
}

TEST_CASE("malformed problems are rejected") {
  LpProblem p;
  p.cost = {1, 1};
  p.rows.push_back({1});
  p.sense.push_back(RowSense::le);
  p.rhs.push_back(1);
  CHECK_THROWS(solve_lp(p));
}

#pragma once
// Independent reference computations used only by the tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "hesslab/cone_algebra.hpp"

namespace oracle {

inline std::vector<double> eigenvalues(const hesslab::HermitianForm& h) {
  Eigen::MatrixXcd m(h.n(), h.n());
  for (int j = 0; j < h.n(); ++j)
    for (int k = 0; k < h.n(); ++k) m(j, k) = h(j, k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  std::vector<double> out(h.n());
  for (int j = 0; j < h.n(); ++j) out[j] = es.eigenvalues()[j];
  std::sort(out.begin(), out.end());
  return out;
}

// Sum over all k-subsets of products.
inline double sigma(const std::vector<double>& lambda, int k) {
  const int n = static_cast<int>(lambda.size());
  double total = 0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    double p = 1;
    for (int j = 0; j < n; ++j)
      if (mask & (1u << j)) p *= lambda[j];
    total += p;
  }
  return total;
}

inline int perm_sign(const std::vector<int>& p) {
  int s = 1;
  for (size_t i = 0; i < p.size(); ++i)
    for (size_t j = i + 1; j < p.size(); ++j)
      if (p[i] > p[j]) s = -s;
  return s;
}

// D(A_1..A_n) = 1/n! sum_{sigma, tau} sgn(sigma) sgn(tau) prod_i A_i[sigma(i)][tau(i)].
inline double mixed_discriminant(const std::vector<hesslab::HermitianForm>& a) {
  const int n = static_cast<int>(a.size());
  std::vector<int> s(n), t(n);
  std::iota(s.begin(), s.end(), 0);
  std::complex<double> total = 0;
  double fact = 1;
  for (int i = 2; i <= n; ++i) fact *= i;
  do {
    std::iota(t.begin(), t.end(), 0);
    do {
      std::complex<double> p = static_cast<double>(perm_sign(s) * perm_sign(t));
      for (int i = 0; i < n; ++i) p *= a[i](s[i], t[i]);
      total += p;
    } while (std::next_permutation(t.begin(), t.end()));
  } while (std::next_permutation(s.begin(), s.end()));
  return total.real() / fact;
}

inline double min_eigenvalue(const hesslab::HermitianForm& h) { return eigenvalues(h).front(); }

// max c.x  s.t.  A x <= b, x >= 0, with b > 0 so the slack basis is feasible.
// Revised simplex with Bland's rule. The basis holds k structural columns and
// the slacks of all rows outside a k-row set R, so every solve is k x k.
struct LpSolution {
  bool optimal = false;
  bool unbounded = false;
  double value = 0.0;
  Eigen::VectorXd x;
};

inline LpSolution max_le(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const int m = static_cast<int>(a.rows()), n = static_cast<int>(a.cols());
  for (int i = 0; i < m; ++i)
    if (!(b[i] > 0)) throw std::invalid_argument("max_le: b must be positive");
  std::vector<int> s, r;  // basic structurals, rows whose slack is nonbasic
  const double eps = 1e-10;
  LpSolution out;
  for (int it = 0; it < 100000; ++it) {
    const int k = static_cast<int>(s.size());
    Eigen::MatrixXd br(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) br(i, j) = a(r[i], s[j]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    if (k) lu.compute(br);
    Eigen::VectorXd xs(k), cs(k), bs(k);
    for (int i = 0; i < k; ++i) cs[i] = c[s[i]], bs[i] = b[r[i]];
    if (k) xs = lu.solve(bs);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    if (k) {
      const Eigen::VectorXd yr = lu.transpose().solve(cs);
      for (int i = 0; i < k; ++i) y[r[i]] = yr[i];
    }
    // Entering variable: columns 0..n-1 structural, n+i slack of row i.
    int enter = -1;
    for (int j = 0; j < n + m && enter < 0; ++j) {
      if (j < n) {
        if (std::find(s.begin(), s.end(), j) != s.end()) continue;
        if (c[j] - y.dot(a.col(j)) > eps) enter = j;
      } else if (std::find(r.begin(), r.end(), j - n) != r.end() && -y[j - n] > eps) {
        enter = j;
      }
    }
    std::vector<char> in_r(m, 0);
    for (int i : r) in_r[i] = 1;
    if (enter < 0) {
      out.optimal = true;
      out.x = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < k; ++i) out.x[s[i]] = xs[i];
      out.value = c.dot(out.x);
      return out;
    }
    Eigen::VectorXd col = enter < n ? Eigen::VectorXd(a.col(enter)) : Eigen::VectorXd::Unit(m, enter - n);
    Eigen::VectorXd ds(k), colr(k);
    for (int i = 0; i < k; ++i) colr[i] = col[r[i]];
    if (k) ds = lu.solve(colr);
    // Ratio test over basic structurals, then basic slacks; ties go to the smaller index.
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    auto consider = [&](int var, double value, double dir) {
      if (dir <= 1e-12) return;
      const double t = value / dir;
      if (t < best - 1e-12 || (t <= best + 1e-12 && var < leave)) best = t, leave = var;
    };
    for (int i = 0; i < k; ++i) consider(s[i], xs[i], ds[i]);
    for (int i = 0; i < m; ++i) {
      if (in_r[i]) continue;
      double slack = b[i], dir = col[i];
      for (int j = 0; j < k; ++j) slack -= a(i, s[j]) * xs[j], dir -= a(i, s[j]) * ds[j];
      consider(n + i, slack, dir);
    }
    if (leave < 0) {
      out.unbounded = true;
      return out;
    }
    if (enter < n)
      s.push_back(enter);
    else
      r.erase(std::find(r.begin(), r.end(), enter - n));
    if (leave < n)
      s.erase(std::find(s.begin(), s.end(), leave));
    else
      r.push_back(leave - n);
  }
  throw std::runtime_error("max_le: iteration cap");
}

}  // namespace oracle

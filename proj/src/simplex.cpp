#include "hesslab/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hesslab {

void LpProblem::add_row(std::vector<double> row, RowSense s, double b) {
  rows.push_back(std::move(row));
  sense.push_back(s);
  rhs.push_back(b);
}

namespace {

// Tableau over the normalized constraint matrix [A | b] (rows m, columns n)
// with the reduced-cost row appended. The original matrix is kept so the
// tableau can be rebuilt as B^{-1} [A | b] to shed accumulated rounding.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m(rows), n(cols), t_((rows + 1) * (cols + 1), 0.0) {}

  double& at(std::size_t i, std::size_t j) { return t_[i * (n + 1) + j]; }
  double& rhs(std::size_t i) { return at(i, n); }
  double& obj(std::size_t j) { return at(m, j); }

  void freeze_original() { orig_.assign(t_.begin(), t_.begin() + m * (n + 1)); }

  void pivot(std::size_t r, std::size_t c) {
    const std::size_t w = n + 1;
    double* pr = &t_[r * w];
    const double inv = 1.0 / pr[c];
    for (std::size_t j = 0; j < w; ++j) pr[j] *= inv;
    pr[c] = 1.0;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == r) continue;
      double* pi = &t_[i * w];
      const double f = pi[c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < w; ++j) pi[j] -= f * pr[j];
      pi[c] = 0.0;
    }
  }

  // Reduced costs of `cost` for the current basis.
  void price(const std::vector<double>& cost, const std::vector<std::size_t>& basis) {
    for (std::size_t j = 0; j < n; ++j) obj(j) = cost[j];
    obj(n) = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double cb = cost[basis[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= n; ++j) obj(j) -= cb * at(i, j);
    }
  }

  // Gauss-Jordan on [B | A | b] with partial pivoting; leaves the tableau
  // untouched if B is numerically singular.
  bool refactor(const std::vector<std::size_t>& basis) {
    const std::size_t w = n + 1;
    std::vector<double> bm(m * m), work(orig_);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < m; ++k) bm[i * m + k] = orig_[i * w + basis[k]];
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t piv = k;
      for (std::size_t i = k + 1; i < m; ++i)
        if (std::abs(bm[i * m + k]) > std::abs(bm[piv * m + k])) piv = i;
      if (std::abs(bm[piv * m + k]) < 1e-12) return false;
      if (piv != k) {
        std::swap_ranges(bm.begin() + k * m, bm.begin() + (k + 1) * m, bm.begin() + piv * m);
        std::swap_ranges(work.begin() + k * w, work.begin() + (k + 1) * w, work.begin() + piv * w);
      }
      const double inv = 1.0 / bm[k * m + k];
      for (std::size_t j = 0; j < m; ++j) bm[k * m + j] *= inv;
      for (std::size_t j = 0; j < w; ++j) work[k * w + j] *= inv;
      for (std::size_t i = 0; i < m; ++i) {
        if (i == k) continue;
        const double f = bm[i * m + k];
        if (f == 0.0) continue;
        for (std::size_t j = 0; j < m; ++j) bm[i * m + j] -= f * bm[k * m + j];
        for (std::size_t j = 0; j < w; ++j) work[i * w + j] -= f * work[k * w + j];
      }
    }
    std::copy(work.begin(), work.end(), t_.begin());
    for (std::size_t i = 0; i < m; ++i) {
      at(i, basis[i]) = 1.0;
      if (rhs(i) < 0 && rhs(i) > -1e-12) rhs(i) = 0.0;
    }
    return true;
  }

  std::size_t m, n;

 private:
  std::vector<double> t_, orig_;
};

struct Phase {
  Tableau& t;
  std::vector<std::size_t>& basis;
  const std::vector<char>& allowed;
  const std::vector<double>& cost;
  const LpOptions& o;
  int& iters;

  // Dantzig pricing; Bland's rule takes over after a run of degenerate
  // pivots so the method cannot cycle. Returns false if unbounded.
  bool run() {
    const std::size_t refresh = std::max<std::size_t>(50, t.m);
    std::size_t since = 0;
    int degenerate = 0;
    for (;;) {
      const bool bland = degenerate > 50;
      std::size_t enter = t.n;
      double most = -o.eps;
      for (std::size_t j = 0; j < t.n; ++j) {
        if (!allowed[j] || t.obj(j) >= -o.eps) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (t.obj(j) < most) most = t.obj(j), enter = j;
      }
      if (enter == t.n) return true;
      std::size_t leave = t.m;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < t.m; ++i) {
        const double a = t.at(i, enter);
        if (a <= o.pivot_eps) continue;
        const double ratio = std::max(0.0, t.rhs(i)) / a;
        if (ratio < best - 1e-14 || (ratio <= best + 1e-14 && leave < t.m && basis[i] < basis[leave])) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
      if (leave == t.m) return false;
      if (++iters > o.max_iters) throw std::runtime_error("solve_lp: iteration cap reached");
      degenerate = best <= 1e-14 ? degenerate + 1 : 0;
      t.pivot(leave, enter);
      basis[leave] = enter;
      if (++since >= refresh) {
        since = 0;
        if (t.refactor(basis)) t.price(cost, basis);
      }
    }
  }
};

}  // namespace

LpResult solve_lp(const LpProblem& p, const LpOptions& o) {
  const std::size_t m = p.rows.size(), nv = p.cost.size();
  if (p.sense.size() != m || p.rhs.size() != m) throw std::invalid_argument("solve_lp: row data size mismatch");
  for (const auto& r : p.rows)
    if (r.size() != nv) throw std::invalid_argument("solve_lp: row length differs from cost length");

  // Normalize to rhs >= 0, then add slack and artificial columns.
  std::vector<double> sign(m, 1.0);
  std::vector<RowSense> sense = p.sense;
  for (std::size_t i = 0; i < m; ++i)
    if (p.rhs[i] < 0) {
      sign[i] = -1.0;
      if (sense[i] == RowSense::le) sense[i] = RowSense::ge;
      else if (sense[i] == RowSense::ge) sense[i] = RowSense::le;
    }
  std::size_t slacks = 0, arts = 0;
  for (auto s : sense) {
    slacks += s != RowSense::eq;
    arts += s != RowSense::le;
  }
  const std::size_t cols = nv + slacks + arts, art0 = nv + slacks;
  Tableau t(m, cols);
  std::vector<std::size_t> basis(m);
  std::size_t si = nv, ai = art0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < nv; ++j) t.at(i, j) = sign[i] * p.rows[i][j];
    t.rhs(i) = sign[i] * p.rhs[i];
    if (sense[i] == RowSense::le) {
      t.at(i, si) = 1.0;
      basis[i] = si++;
    } else {
      if (sense[i] == RowSense::ge) t.at(i, si++) = -1.0;
      t.at(i, ai) = 1.0;
      basis[i] = ai++;
    }
  }
  t.freeze_original();

  LpResult res;
  std::vector<char> allowed(cols, 1);
  if (arts > 0) {
    std::vector<double> phase1(cols, 0.0);
    std::fill(phase1.begin() + art0, phase1.end(), 1.0);
    t.price(phase1, basis);
    Phase{t, basis, allowed, phase1, o, res.iterations}.run();
    if (t.refactor(basis)) t.price(phase1, basis);
    if (-t.obj(cols) > o.feasibility) {
      res.status = LpStatus::infeasible;
      return res;
    }
    // Drive zero-level artificials out where possible; rows with no other
    // nonzero entry are redundant and keep their artificial at zero.
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] < art0) continue;
      std::size_t best = art0;
      for (std::size_t j = 0; j < art0; ++j)
        if (std::abs(t.at(i, j)) > 1e-9 && (best == art0 || std::abs(t.at(i, j)) > std::abs(t.at(i, best)))) best = j;
      if (best < art0) {
        t.pivot(i, best);
        basis[i] = best;
      }
    }
    for (std::size_t j = art0; j < cols; ++j) allowed[j] = 0;
  }

  std::vector<double> cost(cols, 0.0);
  std::copy(p.cost.begin(), p.cost.end(), cost.begin());
  t.refactor(basis);
  t.price(cost, basis);
  if (!Phase{t, basis, allowed, cost, o, res.iterations}.run()) {
    res.status = LpStatus::unbounded;
    return res;
  }
  t.refactor(basis);
  res.status = LpStatus::optimal;
  res.x.assign(nv, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < nv) res.x[basis[i]] = std::max(0.0, t.rhs(i));
  res.value = 0;
  for (std::size_t j = 0; j < nv; ++j) res.value += p.cost[j] * res.x[j];
  for (std::size_t i = 0; i < m; ++i) {
    double lhs = 0, scale = std::abs(p.rhs[i]);
    for (std::size_t j = 0; j < nv; ++j) {
      lhs += p.rows[i][j] * res.x[j];
      scale = std::max(scale, std::abs(p.rows[i][j] * res.x[j]));
    }
    const double slack = p.sense[i] == RowSense::le ? p.rhs[i] - lhs
                         : p.sense[i] == RowSense::ge ? lhs - p.rhs[i]
                                                      : -std::abs(lhs - p.rhs[i]);
    if (slack < -1e-7 * std::max(1.0, scale))
      throw std::runtime_error("solve_lp: numerical loss of feasibility (row " + std::to_string(i) + ", slack " +
                               std::to_string(slack) + ")");
  }
  return res;
}

}  // namespace hesslab

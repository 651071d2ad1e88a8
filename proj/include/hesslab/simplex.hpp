#pragma once

#include <vector>

namespace hesslab {

// Dense two-phase primal simplex: Dantzig pricing, Bland fallback on long
// degenerate runs, periodic refactorization from the original rows.
//   minimize cost . x  subject to  rows[i] . x (<=, >=, =) rhs[i],  x >= 0
enum class RowSense { le, ge, eq };
enum class LpStatus { optimal, infeasible, unbounded };

struct LpProblem {
  std::vector<double> cost;
  std::vector<std::vector<double>> rows;
  std::vector<RowSense> sense;
  std::vector<double> rhs;

  void add_row(std::vector<double> row, RowSense s, double b);
};

struct LpOptions {
  int max_iters = 200000;
  double eps = 1e-11;          // reduced-cost threshold
  double pivot_eps = 1e-9;     // smallest admissible pivot
  double feasibility = 1e-9;   // phase-one residual still counted as feasible
};

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;
  std::vector<double> x;
  int iterations = 0;
};

// Throws std::runtime_error when the iteration cap is reached.
LpResult solve_lp(const LpProblem& p, const LpOptions& opts = {});

}  // namespace hesslab

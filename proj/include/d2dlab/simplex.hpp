#pragma once

#include <cstddef>
#include <vector>

namespace d2dlab {

// Maximize c.x subject to rows*x <= rhs and x >= 0. Every rhs entry must be
// nonnegative, so the slack basis is a valid starting point.
struct LpProblem {
  std::vector<double> c;
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
};

struct LpSolution {
  bool bounded = true;
  double objective = 0.0;
  std::vector<double> x;
  std::size_t pivots = 0;
};

// Dense primal simplex with Bland's entering/leaving rule, which rules out
// cycling on degenerate bases. Throws std::invalid_argument on malformed
// input and std::runtime_error if the pivot budget is exhausted.
LpSolution solve_lp(const LpProblem& lp, double tol = 1e-9);

}  // namespace d2dlab

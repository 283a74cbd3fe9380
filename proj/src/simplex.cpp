#include "d2dlab/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace d2dlab {

LpSolution solve_lp(const LpProblem& lp, double tol) {
  const std::size_t n = lp.c.size();
  const std::size_t m = lp.rows.size();
  if (lp.rhs.size() != m) throw std::invalid_argument("lp: rhs size does not match row count");
  for (const std::vector<double>& row : lp.rows)
    if (row.size() != n) throw std::invalid_argument("lp: row width does not match objective");
  for (double b : lp.rhs)
    if (b < 0.0 || !std::isfinite(b)) throw std::invalid_argument("lp: rhs must be nonnegative");

  // Tableau columns: n structural variables, m slacks, then the rhs.
  std::vector<std::vector<double>> t(m + 1, std::vector<double>(n + m + 1, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = lp.rows[i][j];
    t[i][n + i] = 1.0;
    t[i][n + m] = lp.rhs[i];
  }
  for (std::size_t j = 0; j < n; ++j) t[m][j] = -lp.c[j];

  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

  LpSolution sol;
  // Bland terminates in finitely many pivots; the cap only catches numerical
  // breakdown where roundoff manufactures new "improving" columns forever.
  const std::size_t max_pivots = 50 * (n + m) + 1000;
  while (true) {
    std::size_t enter = n + m;
    for (std::size_t j = 0; j < n + m; ++j) {
      if (t[m][j] < -tol) {
        enter = j;
        break;
      }
    }
    if (enter == n + m) break;  // no improving column: optimal

    std::size_t leave = m;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] > tol) {
        const double ratio = t[i][n + m] / t[i][enter];
        if (ratio < best_ratio - tol ||
            (ratio < best_ratio + tol && (leave == m || basis[i] < basis[leave]))) {
          best_ratio = ratio;
          leave = i;
        }
      }
    }
    if (leave == m) {
      sol.bounded = false;
      return sol;
    }

    const double pivot = t[leave][enter];
    for (std::size_t j = 0; j <= n + m; ++j) t[leave][j] /= pivot;
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = t[i][enter];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= n + m; ++j) t[i][j] -= f * t[leave][j];
    }
    basis[leave] = enter;

    if (++sol.pivots > max_pivots)
      throw std::runtime_error("lp: pivot budget exhausted after " +
                               std::to_string(sol.pivots) + " pivots (last pivot magnitude " +
                               std::to_string(std::fabs(pivot)) + ")");
  }

  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) sol.x[basis[i]] = t[i][n + m];
  sol.objective = t[m][n + m];
  return sol;
}

}  // namespace d2dlab

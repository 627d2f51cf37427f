#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bell_lab {

/// Raised when the feasibility solver fails to converge; usually a sign of
/// tolerance misconfiguration rather than a property of the input.
struct solver_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Field>
struct FeasibilityOutcome {
  bool feasible = false;
  std::vector<Field> solution;  // x with A x = b, x >= 0 (when feasible)
  Field infeasibility{};        // phase-1 objective: L1 residual at optimum
  int iterations = 0;
};

/// Phase-1 simplex for the small dense problem: find x >= 0 with A x = b,
/// where every b_i >= 0. Artificial variables start basic; Bland's rule on
/// both the entering and leaving choices makes the pivot sequence cycle-free
/// and deterministic. Field is double (zero_tol ~ 1e-12) or an exact rational
/// type (zero_tol = 0).
template <typename Field>
FeasibilityOutcome<Field> solve_equality_feasibility(
    const std::vector<std::vector<Field>>& a, const std::vector<Field>& b,
    const Field& zero_tol, int max_iterations = 10000) {
  const std::size_t m = a.size();
  if (m == 0 || b.size() != m) {
    throw std::invalid_argument("feasibility: bad constraint dimensions");
  }
  const std::size_t n = a[0].size();
  const Field zero{};
  for (std::size_t i = 0; i < m; ++i) {
    if (a[i].size() != n) throw std::invalid_argument("feasibility: ragged matrix");
    if (b[i] < zero) throw std::invalid_argument("feasibility: b must be >= 0");
  }

  // Tableau columns: n structural variables, m artificials, then the rhs.
  const std::size_t cols = n + m + 1;
  std::vector<std::vector<Field>> t(m, std::vector<Field>(cols, zero));
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
    t[i][n + i] = Field{1};
    t[i][cols - 1] = b[i];
    basis[i] = n + i;
  }
  // Phase-1 reduced costs: minimize the artificial sum, so the cost row
  // starts as -(sum of constraint rows) over the structural columns.
  std::vector<Field> cost(cols, zero);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < m; ++i) cost[j] -= t[i][j];
  }
  for (std::size_t i = 0; i < m; ++i) cost[cols - 1] -= t[i][cols - 1];

  FeasibilityOutcome<Field> out;
  const Field neg_tol = zero - zero_tol;
  for (int iter = 0;; ++iter) {
    if (iter >= max_iterations) {
      throw solver_error("feasibility simplex: iteration limit reached");
    }
    // Bland: entering column = lowest index with negative reduced cost.
    std::size_t enter = cols;
    for (std::size_t j = 0; j + 1 < cols; ++j) {
      if (cost[j] < neg_tol) {
        enter = j;
        break;
      }
    }
    if (enter == cols) {
      out.iterations = iter;
      break;
    }
    // Ratio test; tie broken by the lowest basis variable index.
    std::size_t leave = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] > zero_tol) {
        if (leave == m) {
          leave = i;
          continue;
        }
        const Field lhs = t[i][cols - 1] * t[leave][enter];
        const Field rhs = t[leave][cols - 1] * t[i][enter];
        if (lhs < rhs || (lhs == rhs && basis[i] < basis[leave])) leave = i;
      }
    }
    if (leave == m) {
      // Unbounded phase-1 cannot happen (objective bounded below by 0).
      throw solver_error("feasibility simplex: no pivot row");
    }
    // Pivot.
    const Field pivot = t[leave][enter];
    for (std::size_t j = 0; j < cols; ++j) t[leave][j] /= pivot;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave) continue;
      const Field factor = t[i][enter];
      if (factor == zero) continue;
      for (std::size_t j = 0; j < cols; ++j) t[i][j] -= factor * t[leave][j];
    }
    {
      const Field factor = cost[enter];
      if (!(factor == zero)) {
        for (std::size_t j = 0; j < cols; ++j) cost[j] -= factor * t[leave][j];
      }
    }
    basis[leave] = enter;
  }

  Field residual{};
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] >= n) residual += t[i][cols - 1];
  }
  out.infeasibility = residual;
  out.feasible = !(residual > zero_tol);
  out.solution.assign(n, zero);
  if (out.feasible) {
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] < n) out.solution[basis[i]] = t[i][cols - 1];
    }
  }
  return out;
}

}  // namespace bell_lab

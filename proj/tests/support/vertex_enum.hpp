#pragma once

// Brute-force LP oracle: enumerates every basis/bound assignment of a small
// box-constrained LP. Independent of the simplex implementation on purpose;
// only usable for n <= ~10.

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "proxyflow/lp.hpp"

namespace testsupport {

struct EnumResult {
  proxyflow::SolveStatus status = proxyflow::SolveStatus::Infeasible;
  double objective = std::numeric_limits<double>::infinity();
  Eigen::VectorXd y;
};

inline EnumResult enumerate_lp(const proxyflow::StandardLp& lp,
                               double feas_tol = 1e-9) {
  const int m = lp.n_rows();
  const int n = lp.n_cols();
  EnumResult best;

  if (m == 0) {
    best.status = proxyflow::SolveStatus::Optimal;
    best.y.resize(n);
    for (int j = 0; j < n; ++j) {
      best.y[j] = lp.c[j] >= 0 ? lp.lb[j] : lp.ub[j];
    }
    best.objective = lp.c.dot(best.y);
    return best;
  }
  if (m > n) return best;

  std::vector<int> comb(m);
  for (int i = 0; i < m; ++i) comb[i] = i;

  auto advance = [&]() {
    int i = m - 1;
    while (i >= 0 && comb[i] == n - m + i) --i;
    if (i < 0) return false;
    ++comb[i];
    for (int j = i + 1; j < m; ++j) comb[j] = comb[j - 1] + 1;
    return true;
  };

  do {
    Eigen::MatrixXd basis(m, m);
    for (int i = 0; i < m; ++i) basis.col(i) = lp.a.col(comb[i]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
    if (!lu.isInvertible()) continue;

    std::vector<int> nonbasic;
    for (int j = 0; j < n; ++j) {
      bool in = false;
      for (int i = 0; i < m; ++i) in |= (comb[i] == j);
      if (!in) nonbasic.push_back(j);
    }
    const int free_count = static_cast<int>(nonbasic.size());
    for (long mask = 0; mask < (1L << free_count); ++mask) {
      Eigen::VectorXd y(n);
      Eigen::VectorXd rhs = lp.b;
      for (int t = 0; t < free_count; ++t) {
        const int j = nonbasic[t];
        y[j] = (mask >> t) & 1 ? lp.ub[j] : lp.lb[j];
        rhs -= lp.a.col(j) * y[j];
      }
      const Eigen::VectorXd yb = lu.solve(rhs);
      bool ok = true;
      for (int i = 0; i < m && ok; ++i) {
        const int j = comb[i];
        ok = yb[i] >= lp.lb[j] - feas_tol && yb[i] <= lp.ub[j] + feas_tol;
      }
      if (!ok) continue;
      for (int i = 0; i < m; ++i) y[comb[i]] = yb[i];
      const double obj = lp.c.dot(y);
      if (obj < best.objective) {
        best.objective = obj;
        best.y = y;
        best.status = proxyflow::SolveStatus::Optimal;
      }
    }
  } while (advance());

  return best;
}

}  // namespace testsupport

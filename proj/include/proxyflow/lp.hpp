#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "proxyflow/errors.hpp"

namespace proxyflow {

/// Box-constrained LP in equality standard form:
///   min c'y  s.t.  A y = b,  lb <= y <= ub
/// with finite bounds on every variable.
struct StandardLp {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;
  std::vector<std::string> row_names;
  std::vector<std::string> col_names;

  int n_rows() const { return static_cast<int>(a.rows()); }
  int n_cols() const { return static_cast<int>(a.cols()); }

  int col(const std::string& name) const;
  int row(const std::string& name) const;

  /// Shape and bound sanity; throws ValidationError.
  void check() const;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded };

std::string to_string(SolveStatus s);

struct LpSolution {
  Eigen::VectorXd y;
  Eigen::VectorXd z;     // equality-row duals
  Eigen::VectorXd z_lb;  // lower-bound duals, >= 0
  Eigen::VectorXd z_ub;  // upper-bound duals, >= 0
  double objective = 0.0;
  SolveStatus status = SolveStatus::Infeasible;
  int iterations = 0;

  double dual_objective(const StandardLp& lp) const {
    return lp.b.dot(z) + lp.lb.dot(z_lb) - lp.ub.dot(z_ub);
  }
};

/// Dense revised simplex for bounded variables: two phases, explicit basis
/// inverse with product-form updates, periodic refactorization, and a Bland
/// fallback when degeneracy stalls. Throws NumericalFailure when the pivot
/// budget is exhausted or the final residual check fails.
LpSolution simplex_solve(const StandardLp& lp);

}  // namespace proxyflow

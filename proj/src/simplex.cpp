#include "proxyflow/lp.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

namespace proxyflow {

int StandardLp::col(const std::string& name) const {
  for (size_t j = 0; j < col_names.size(); ++j) {
    if (col_names[j] == name) return static_cast<int>(j);
  }
  throw Error("unknown LP column '" + name + "'");
}

int StandardLp::row(const std::string& name) const {
  for (size_t i = 0; i < row_names.size(); ++i) {
    if (row_names[i] == name) return static_cast<int>(i);
  }
  throw Error("unknown LP row '" + name + "'");
}

void StandardLp::check() const {
  std::vector<std::string> bad;
  if (a.rows() != b.size()) bad.push_back("A rows != b size");
  if (a.cols() != c.size()) bad.push_back("A cols != c size");
  if (lb.size() != a.cols() || ub.size() != a.cols()) {
    bad.push_back("bound vectors do not match column count");
  } else {
    for (int j = 0; j < a.cols(); ++j) {
      if (!(lb[j] <= ub[j])) {
        bad.push_back("lb > ub at column " + std::to_string(j));
      }
      if (!std::isfinite(lb[j]) || !std::isfinite(ub[j])) {
        bad.push_back("non-finite bound at column " + std::to_string(j));
      }
    }
  }
  if (!bad.empty()) throw ValidationError(bad);
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
  }
  return "?";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
constexpr int kRefactorEvery = 50;
constexpr int kBlandTrigger = 40;

enum class VarStatus : char { Basic, AtLower, AtUpper };

/// One solver run over the augmented (structural + artificial) system.
class Simplex {
 public:
  explicit Simplex(const StandardLp& lp)
      : lp_(lp), m_(lp.n_rows()), n_(lp.n_cols()), total_(n_ + m_) {
    lb_.resize(total_);
    ub_.resize(total_);
    x_.resize(total_);
    status_.assign(total_, VarStatus::AtLower);
    lb_.head(n_) = lp.lb;
    ub_.head(n_) = lp.ub;

    // Start every structural variable at the bound closer to zero.
    for (int j = 0; j < n_; ++j) {
      if (std::abs(lp.lb[j]) <= std::abs(lp.ub[j])) {
        x_[j] = lp.lb[j];
        status_[j] = VarStatus::AtLower;
      } else {
        x_[j] = lp.ub[j];
        status_[j] = VarStatus::AtUpper;
      }
    }

    // Artificial columns carry the residual; they form the first basis.
    Eigen::VectorXd resid = lp.b - lp.a * x_.head(n_);
    art_sign_.resize(m_);
    basis_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      art_sign_[i] = (resid[i] >= 0.0) ? 1.0 : -1.0;
      const int j = n_ + i;
      lb_[j] = 0.0;
      ub_[j] = kInf;
      x_[j] = std::abs(resid[i]);
      status_[j] = VarStatus::Basic;
      basis_[i] = j;
    }
    binv_ = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) binv_(i, i) = art_sign_[i];
  }

  LpSolution run() {
    LpSolution sol;
    if (m_ == 0) return solve_unconstrained();

    // Phase 1: drive the artificial residual to zero.
    Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(total_);
    phase1_cost.tail(m_).setOnes();
    const auto p1 = iterate(phase1_cost, /*phase1=*/true);
    if (p1 != Outcome::Optimal) {
      throw NumericalFailure("simplex phase 1 exceeded its pivot budget");
    }
    const double infeas = x_.tail(m_).sum();
    const double feas_tol = 1e-7 * (1.0 + lp_.b.cwiseAbs().maxCoeff());
    if (infeas > feas_tol) {
      sol.status = SolveStatus::Infeasible;
      sol.iterations = iterations_;
      return sol;
    }

    expel_artificials();
    for (int i = 0; i < m_; ++i) ub_[n_ + i] = 0.0;
    refactorize();

    Eigen::VectorXd cost = Eigen::VectorXd::Zero(total_);
    cost.head(n_) = lp_.c;
    const auto p2 = iterate(cost, /*phase1=*/false);
    if (p2 == Outcome::IterationLimit) {
      throw NumericalFailure("simplex phase 2 exceeded its pivot budget");
    }
    if (p2 == Outcome::Unbounded) {
      sol.status = SolveStatus::Unbounded;
      sol.iterations = iterations_;
      return sol;
    }

    refactorize();
    verify_residual();
    return extract(cost);
  }

 private:
  enum class Outcome { Optimal, Unbounded, IterationLimit };

  LpSolution solve_unconstrained() {
    LpSolution sol;
    sol.y.resize(n_);
    for (int j = 0; j < n_; ++j) {
      sol.y[j] = (lp_.c[j] >= 0.0) ? lp_.lb[j] : lp_.ub[j];
    }
    sol.z.resize(0);
    sol.z_lb = lp_.c.cwiseMax(0.0);
    sol.z_ub = (-lp_.c).cwiseMax(0.0);
    sol.objective = lp_.c.dot(sol.y);
    sol.status = SolveStatus::Optimal;
    return sol;
  }

  Eigen::VectorXd column(int j) const {
    if (j < n_) return lp_.a.col(j);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m_);
    e[j - n_] = art_sign_[j - n_];
    return e;
  }

  double column_dot(const Eigen::VectorXd& z, int j) const {
    if (j < n_) return z.dot(lp_.a.col(j));
    return z[j - n_] * art_sign_[j - n_];
  }

  /// Swap basic artificials for structural columns via degenerate pivots.
  /// Rows with no usable pivot are redundant; their artificial stays basic
  /// at value zero and absorbs the redundancy.
  void expel_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      const Eigen::VectorXd rho = binv_.row(i).transpose();
      int best_j = -1;
      double best_mag = 1e-7;
      for (int j = 0; j < n_; ++j) {
        if (status_[j] == VarStatus::Basic) continue;
        const double alpha = rho.dot(lp_.a.col(j));
        if (std::abs(alpha) > best_mag) {
          best_mag = std::abs(alpha);
          best_j = j;
        }
      }
      if (best_j < 0) continue;
      const Eigen::VectorXd w = binv_ * column(best_j);
      const int art = basis_[i];
      status_[art] = VarStatus::AtLower;
      x_[art] = 0.0;
      status_[best_j] = VarStatus::Basic;
      basis_[i] = best_j;
      apply_inverse_update(w, i);
    }
  }

  void apply_inverse_update(const Eigen::VectorXd& w, int pivot_row) {
    const double pivot = w[pivot_row];
    binv_.row(pivot_row) /= pivot;
    for (int r = 0; r < m_; ++r) {
      if (r != pivot_row && w[r] != 0.0) {
        binv_.row(r) -= w[r] * binv_.row(pivot_row);
      }
    }
  }

  void refactorize() {
    Eigen::MatrixXd basis_mat(m_, m_);
    for (int i = 0; i < m_; ++i) basis_mat.col(i) = column(basis_[i]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_mat);
    binv_ = lu.inverse();
    // Recompute basic values from the nonbasic ones for accuracy.
    Eigen::VectorXd rhs = lp_.b;
    for (int j = 0; j < total_; ++j) {
      if (status_[j] != VarStatus::Basic && x_[j] != 0.0) {
        rhs -= column(j) * x_[j];
      }
    }
    const Eigen::VectorXd xb = binv_ * rhs;
    for (int i = 0; i < m_; ++i) x_[basis_[i]] = xb[i];
    pivots_since_refactor_ = 0;
  }

  Outcome iterate(const Eigen::VectorXd& cost, bool phase1) {
    const int max_iters = 2000 + 200 * (m_ + n_);
    const double dual_tol = 1e-9 * (1.0 + cost.cwiseAbs().maxCoeff());
    int degenerate_streak = 0;
    bool bland = false;

    for (;; ++iterations_) {
      if (iterations_ > max_iters) return Outcome::IterationLimit;

      Eigen::VectorXd cb(m_);
      for (int i = 0; i < m_; ++i) cb[i] = cost[basis_[i]];
      const Eigen::VectorXd z = binv_.transpose() * cb;

      // Pricing: most violating reduced cost, or smallest index under Bland.
      int entering = -1;
      double best = dual_tol;
      int direction = +1;
      for (int j = 0; j < total_; ++j) {
        if (status_[j] == VarStatus::Basic) continue;
        if (ub_[j] - lb_[j] <= 0.0) continue;  // fixed, nothing to gain
        const double d = cost[j] - column_dot(z, j);
        double viol = 0.0;
        int dir = 0;
        if (status_[j] == VarStatus::AtLower && d < -dual_tol) {
          viol = -d;
          dir = +1;
        } else if (status_[j] == VarStatus::AtUpper && d > dual_tol) {
          viol = d;
          dir = -1;
        } else {
          continue;
        }
        if (bland) {
          entering = j;
          direction = dir;
          break;
        }
        if (viol > best) {
          best = viol;
          entering = j;
          direction = dir;
        }
      }
      if (entering < 0) return Outcome::Optimal;

      const Eigen::VectorXd w = binv_ * column(entering);

      // Ratio test: entering moves by t >= 0 toward its opposite bound;
      // basic variable at position i changes at rate -direction * w[i].
      double t_max = ub_[entering] - lb_[entering];
      int leaving_pos = -1;
      bool leaving_to_upper = false;
      double leaving_pivot = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double rate = -direction * w[i];
        if (std::abs(rate) <= kPivotTol) continue;
        const int bj = basis_[i];
        double t;
        bool to_upper;
        if (rate < 0.0) {
          t = (x_[bj] - lb_[bj]) / (-rate);
          to_upper = false;
        } else {
          if (ub_[bj] == kInf) continue;
          t = (ub_[bj] - x_[bj]) / rate;
          to_upper = true;
        }
        if (t < 0.0) t = 0.0;
        bool take = false;
        if (t < t_max - 1e-12) {
          take = true;
        } else if (t <= t_max + 1e-12 && leaving_pos >= 0 &&
                   std::abs(w[i]) > std::abs(leaving_pivot)) {
          take = true;  // tie: prefer the larger pivot for stability
        }
        if (take) {
          t_max = std::min(t, t_max);
          leaving_pos = i;
          leaving_to_upper = to_upper;
          leaving_pivot = w[i];
        }
      }
      if (t_max == kInf) {
        return phase1 ? Outcome::IterationLimit : Outcome::Unbounded;
      }

      // Apply the step.
      x_[entering] += direction * t_max;
      for (int i = 0; i < m_; ++i) x_[basis_[i]] -= direction * t_max * w[i];

      if (t_max <= 1e-12) {
        if (++degenerate_streak > kBlandTrigger) bland = true;
      } else {
        degenerate_streak = 0;
        bland = false;
      }

      if (leaving_pos < 0) {
        // Bound flip: the entering variable ran to its other bound.
        status_[entering] =
            (direction > 0) ? VarStatus::AtUpper : VarStatus::AtLower;
        x_[entering] = (direction > 0) ? ub_[entering] : lb_[entering];
        continue;
      }

      const int leaving = basis_[leaving_pos];
      status_[leaving] =
          leaving_to_upper ? VarStatus::AtUpper : VarStatus::AtLower;
      x_[leaving] = leaving_to_upper ? ub_[leaving] : lb_[leaving];
      status_[entering] = VarStatus::Basic;
      basis_[leaving_pos] = entering;

      if (std::abs(w[leaving_pos]) < kPivotTol) {
        refactorize();
        continue;
      }
      apply_inverse_update(w, leaving_pos);
      if (++pivots_since_refactor_ >= kRefactorEvery) refactorize();
    }
  }

  void verify_residual() const {
    Eigen::VectorXd art(m_);
    for (int i = 0; i < m_; ++i) art[i] = art_sign_[i] * x_[n_ + i];
    const Eigen::VectorXd resid = lp_.a * x_.head(n_) + art - lp_.b;
    const double tol = 1e-8 * (1.0 + lp_.b.cwiseAbs().maxCoeff());
    if (resid.cwiseAbs().maxCoeff() > tol || art.cwiseAbs().maxCoeff() > tol) {
      throw NumericalFailure("simplex terminated with residual " +
                             std::to_string(resid.cwiseAbs().maxCoeff()));
    }
  }

  LpSolution extract(const Eigen::VectorXd& cost) const {
    LpSolution sol;
    sol.status = SolveStatus::Optimal;
    sol.iterations = iterations_;
    sol.y = x_.head(n_);
    sol.objective = lp_.c.dot(sol.y);

    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cost[basis_[i]];
    sol.z = binv_.transpose() * cb;
    sol.z_lb = Eigen::VectorXd::Zero(n_);
    sol.z_ub = Eigen::VectorXd::Zero(n_);
    for (int j = 0; j < n_; ++j) {
      if (status_[j] == VarStatus::Basic) continue;
      const double d = lp_.c[j] - sol.z.dot(lp_.a.col(j));
      if (ub_[j] - lb_[j] <= 0.0) {
        // Fixed variable: split the reduced cost between both bound duals.
        sol.z_lb[j] = std::max(d, 0.0);
        sol.z_ub[j] = std::max(-d, 0.0);
      } else if (status_[j] == VarStatus::AtLower) {
        sol.z_lb[j] = std::max(d, 0.0);
      } else {
        sol.z_ub[j] = std::max(-d, 0.0);
      }
    }
    return sol;
  }

  const StandardLp& lp_;
  int m_, n_, total_;
  Eigen::VectorXd lb_, ub_, x_;
  Eigen::VectorXd art_sign_;
  std::vector<VarStatus> status_;
  std::vector<int> basis_;
  Eigen::MatrixXd binv_;
  int iterations_ = 0;
  int pivots_since_refactor_ = 0;
};

}  // namespace

LpSolution simplex_solve(const StandardLp& lp) {
  lp.check();
  Simplex solver(lp);
  return solver.run();
}

}  // namespace proxyflow

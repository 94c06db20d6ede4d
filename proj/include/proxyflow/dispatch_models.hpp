#pragma once

#include <Eigen/Dense>

#include "proxyflow/instance.hpp"
#include "proxyflow/lp.hpp"
#include "proxyflow/network.hpp"
#include "proxyflow/sensitivity.hpp"

namespace proxyflow {

/// Penalty prices in $/MWh. The defaults are this repo's configuration
/// values, chosen in the range used for operational penalty curves.
struct PenaltyPrices {
  double m_th = 1500.0;   // thermal slack
  double m_pb = 10000.0;  // power-balance deviation
  double m_r = 1100.0;    // reserve shortfall
};

struct Dispatch {
  Eigen::VectorXd p;      // per-gen MW
  Eigen::VectorXd r;      // per-gen MW
  Eigen::VectorXd xi_th;  // per-line MW
  double objective = 0.0;
  SolveStatus status = SolveStatus::Infeasible;
  double dual_balance = 0.0;
  double dual_reserve = 0.0;
};

/// Thermal slacks implied by a dispatch: per line, the positive part of the
/// flow-bound excess in either direction.
Eigen::VectorXd thermal_slacks(const Network& net,
                               const SensitivityMatrices& sens,
                               const Eigen::VectorXd& loads,
                               const Eigen::VectorXd& p);

/// Economic dispatch with reserves and soft thermal limits, in equality
/// standard form with finite boxes. Columns: p, r, xi, then slack columns.
StandardLp build_ed_lp(const Network& net, const Instance& inst,
                       const SensitivityMatrices& sens,
                       const PenaltyPrices& prices = {});

Dispatch solve_ed(const Network& net, const Instance& inst,
                  const SensitivityMatrices& sens,
                  const PenaltyPrices& prices = {});

/// DC-OPF: no reserves, hard flow bounds, explicit flow variables.
/// Columns: p (gens) then f (lines); rows: balance then one per line.
StandardLp build_dcopf_lp(const Network& net, const Instance& inst,
                          const SensitivityMatrices& sens);

Dispatch solve_dcopf(const Network& net, const Instance& inst,
                     const SensitivityMatrices& sens);

/// L1 projection of a predicted dispatch onto the ED feasible set
/// (balance, reserve, generation boxes; thermal limits are soft and
/// recomputed from the projected point). Throws InfeasibleError when the
/// feasible set is empty.
Dispatch projection_repair(const Network& net, const Instance& inst,
                           const SensitivityMatrices& sens,
                           const Eigen::VectorXd& p_hat,
                           const PenaltyPrices& prices = {});

/// Largest achievable reserve margin sum(min(rmax, pmax - p)) over balanced
/// in-box dispatches; the certificate used to decide whether a reserve
/// requirement is jointly satisfiable.
double max_reserve_capability(const Network& net, const Instance& inst);

bool reserve_satisfiable(const Network& net, const Instance& inst,
                         double tol = 1e-9);

struct PenalizedObjective {
  double total = 0.0;
  double cost = 0.0;
  double thermal = 0.0;
  double balance = 0.0;
  double reserve = 0.0;

  double balance_violation = 0.0;  // MW
  double reserve_shortfall = 0.0;  // MW
  double max_thermal = 0.0;        // MW
};

/// Objective of a (possibly infeasible) prediction with violations priced
/// in: c(p) + m_th |xi|_1 + m_pb |1'(p-d)| + m_r max(0, R - sum min(rmax,
/// pmax - p)).
PenalizedObjective penalized_objective(const Network& net,
                                       const Instance& inst,
                                       const SensitivityMatrices& sens,
                                       const Eigen::VectorXd& p,
                                       const PenaltyPrices& prices = {});

}  // namespace proxyflow

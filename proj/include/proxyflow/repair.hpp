#pragma once

#include <Eigen/Dense>

#include "proxyflow/errors.hpp"
#include "proxyflow/instance.hpp"
#include "proxyflow/network.hpp"

namespace proxyflow {

/// Everything the repair layers need to know about one instance.
struct RepairContext {
  Eigen::VectorXd glb;   // generator lower bounds, MW
  Eigen::VectorXd gub;   // generator upper bounds, MW
  Eigen::VectorXd rbar;  // reserve capacities, MW
  double total_load = 0.0;
  double reserve_req = 0.0;

  int n_gens() const { return static_cast<int>(glb.size()); }
};

RepairContext make_repair_context(const Network& net, const Instance& inst);

// --- power balance repair ---------------------------------------------------

enum class BalanceBranch { None, Up, Down };

/// Forward record; the branch taken is authoritative for the backward pass.
struct BalanceTrace {
  BalanceBranch branch = BalanceBranch::None;
  double zeta = 0.0;
  double denom = 0.0;          // 1'gub - 1'p_hat (up) or 1'p_hat - 1'glb (down)
  Eigen::VectorXd p_hat;
};

/// Proportionally scales the prediction toward the binding bound so that
/// 1'p equals the total load exactly. Requires box-feasible input and a
/// servable load (InfeasibleLoad otherwise).
Eigen::VectorXd power_balance_repair(const Eigen::VectorXd& p_hat,
                                     const RepairContext& ctx,
                                     BalanceTrace* trace = nullptr);

Eigen::VectorXd power_balance_repair_backward(const BalanceTrace& trace,
                                              const RepairContext& ctx,
                                              const Eigen::VectorXd& dl_dp);

// --- reserve repair -----------------------------------------------------------

struct ReserveTrace {
  Eigen::Array<bool, Eigen::Dynamic, 1> in_up_set;   // p <= pmax - rmax
  Eigen::Array<bool, Eigen::Dynamic, 1> headroom_branch;  // min picks pmax - p
  double delta_r = 0.0;
  double delta_up = 0.0;
  double delta_dn = 0.0;
  double delta = 0.0;
  int argmin = -1;  // -1: clipped at zero, 0: delta_r, 1: delta_up, 2: delta_dn
  double alpha_up = 0.0;
  double alpha_dn = 0.0;
  double shortfall = 0.0;  // unmet reserve after repair, MW
  Eigen::VectorXd p_tilde;
};

struct ReserveRepairResult {
  Eigen::VectorXd p;  // shifted dispatch, still balanced
  Eigen::VectorXd r;  // min(rmax, pmax - p): maximal feasible reserves
  ReserveTrace trace;
};

/// Shifts balanced generation from reserve-starved units onto units with
/// headroom until the requirement is met or no transfer remains. Never
/// breaks the balance or the boxes; unmet reserve ends up in
/// trace.shortfall.
ReserveRepairResult reserve_repair(const Eigen::VectorXd& p_tilde,
                                   const RepairContext& ctx);

Eigen::VectorXd reserve_repair_backward(const ReserveTrace& trace,
                                        const RepairContext& ctx,
                                        const Eigen::VectorXd& dl_dp);

// --- baselines -----------------------------------------------------------------

struct CompletionResult {
  Eigen::VectorXd p;       // full dispatch
  double bound_violation;  // distance of the residual unit outside its box
};

/// Fills the designated residual generator with whatever closes the power
/// balance; its output may leave the box (violation reported, not hidden).
CompletionResult equality_completion(const Eigen::VectorXd& p_partial,
                                     int residual, const RepairContext& ctx);

/// dL/dp_partial from dL/dp_full; the residual unit's cotangent flows back
/// with opposite sign through the balance identity.
Eigen::VectorXd equality_completion_backward(const Eigen::VectorXd& dl_dp,
                                             int residual);

struct CorrectionTrace {
  struct Step {
    Eigen::Array<bool, Eigen::Dynamic, 1> inside_box;
    Eigen::Array<bool, Eigen::Dynamic, 1> headroom_branch;
    double balance_residual;
    bool shortfall_active;
  };
  Eigen::Array<bool, Eigen::Dynamic, 1> initial_inside;
  std::vector<Step> steps;
  std::vector<double> violation_history;  // squared violation per step
  Eigen::VectorXd p_out;
};

/// Fixed-step projected gradient descent on the squared balance and reserve
/// violations; not guaranteed to reach zero.
Eigen::VectorXd unrolled_correction(const Eigen::VectorXd& p_hat,
                                    const RepairContext& ctx, int steps,
                                    double step_size,
                                    CorrectionTrace* trace = nullptr);

Eigen::VectorXd unrolled_correction_backward(const CorrectionTrace& trace,
                                             const RepairContext& ctx,
                                             double step_size,
                                             const Eigen::VectorXd& dl_dp);

/// Default step size for which the projected descent is monotone.
double default_correction_step(int n_gens);

/// Squared violation the correction minimizes; exposed for tests.
double correction_violation(const Eigen::VectorXd& p, const RepairContext& ctx);

}  // namespace proxyflow

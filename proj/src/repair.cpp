#include "proxyflow/repair.hpp"

#include <algorithm>
#include <cmath>

namespace proxyflow {

RepairContext make_repair_context(const Network& net, const Instance& inst) {
  const EffectiveFleet fleet = effective_fleet(net, inst);
  RepairContext ctx;
  ctx.glb = fleet.pmin;
  ctx.gub = fleet.pmax;
  ctx.rbar = fleet.rmax;
  ctx.total_load = inst.total_load();
  ctx.reserve_req = inst.reserve_req;
  return ctx;
}

Eigen::VectorXd power_balance_repair(const Eigen::VectorXd& p_hat,
                                     const RepairContext& ctx,
                                     BalanceTrace* trace) {
  const double sum_lo = ctx.glb.sum();
  const double sum_hi = ctx.gub.sum();
  const double load = ctx.total_load;
  if (load < sum_lo - 1e-9 || load > sum_hi + 1e-9) {
    throw InfeasibleLoad("total load " + std::to_string(load) +
                         " outside the servable range [" +
                         std::to_string(sum_lo) + ", " +
                         std::to_string(sum_hi) + "]");
  }
  const double sum_p = p_hat.sum();

  BalanceTrace t;
  t.p_hat = p_hat;
  Eigen::VectorXd out;
  if (sum_p < load) {
    t.branch = BalanceBranch::Up;
    t.denom = sum_hi - sum_p;
    t.zeta = (load - sum_p) / t.denom;  // denom >= load - sum_p > 0
    out = (1.0 - t.zeta) * p_hat + t.zeta * ctx.gub;
  } else if (sum_p - sum_lo > 0.0) {
    t.branch = BalanceBranch::Down;
    t.denom = sum_p - sum_lo;
    t.zeta = (sum_p - load) / t.denom;
    out = (1.0 - t.zeta) * p_hat + t.zeta * ctx.glb;
  } else {
    // sum_p == sum_lo == load: nothing to scale.
    t.branch = BalanceBranch::None;
    out = p_hat;
  }
  if (trace) *trace = std::move(t);
  return out;
}

Eigen::VectorXd power_balance_repair_backward(const BalanceTrace& trace,
                                              const RepairContext& ctx,
                                              const Eigen::VectorXd& dl_dp) {
  if (trace.branch == BalanceBranch::None) return dl_dp;
  const double denom2 = trace.denom * trace.denom;
  if (trace.branch == BalanceBranch::Up) {
    // zeta = (D - S)/(U - S), dzeta/dS = (D - U)/(U - S)^2.
    const double dzeta =
        (ctx.total_load - ctx.gub.sum()) / denom2;
    const double mix = dl_dp.dot(ctx.gub - trace.p_hat);
    return (1.0 - trace.zeta) * dl_dp +
           Eigen::VectorXd::Constant(dl_dp.size(), dzeta * mix);
  }
  // zeta = (S - D)/(S - L), dzeta/dS = (D - L)/(S - L)^2.
  const double dzeta = (ctx.total_load - ctx.glb.sum()) / denom2;
  const double mix = dl_dp.dot(ctx.glb - trace.p_hat);
  return (1.0 - trace.zeta) * dl_dp +
         Eigen::VectorXd::Constant(dl_dp.size(), dzeta * mix);
}

ReserveRepairResult reserve_repair(const Eigen::VectorXd& p_tilde,
                                   const RepairContext& ctx) {
  const int ng = ctx.n_gens();
  ReserveRepairResult res;
  ReserveTrace& t = res.trace;
  t.p_tilde = p_tilde;
  t.in_up_set.resize(ng);
  t.headroom_branch.resize(ng);

  double provided = 0.0;
  t.delta_up = 0.0;
  t.delta_dn = 0.0;
  for (int g = 0; g < ng; ++g) {
    const double knee = ctx.gub[g] - ctx.rbar[g];
    t.in_up_set[g] = p_tilde[g] <= knee;
    if (t.in_up_set[g]) {
      t.delta_up += knee - p_tilde[g];
    } else {
      t.delta_dn += p_tilde[g] - knee;
    }
    const double headroom = ctx.gub[g] - p_tilde[g];
    // Tie frozen on the rbar branch: zero derivative.
    t.headroom_branch[g] = headroom < ctx.rbar[g];
    provided += std::min(ctx.rbar[g], headroom);
  }
  t.delta_r = ctx.reserve_req - provided;

  double m = t.delta_r;
  t.argmin = 0;
  if (t.delta_up < m) {
    m = t.delta_up;
    t.argmin = 1;
  }
  if (t.delta_dn < m) {
    m = t.delta_dn;
    t.argmin = 2;
  }
  if (m <= 0.0) {
    t.delta = 0.0;
    t.argmin = -1;
  } else {
    t.delta = m;
  }
  t.alpha_up = (t.delta_up > 0.0) ? t.delta / t.delta_up : 0.0;
  t.alpha_dn = (t.delta_dn > 0.0) ? t.delta / t.delta_dn : 0.0;

  res.p.resize(ng);
  res.r.resize(ng);
  double achieved = 0.0;
  for (int g = 0; g < ng; ++g) {
    const double knee = ctx.gub[g] - ctx.rbar[g];
    if (t.in_up_set[g]) {
      res.p[g] = p_tilde[g] + t.alpha_up * (knee - p_tilde[g]);
    } else {
      res.p[g] = p_tilde[g] - t.alpha_dn * (p_tilde[g] - knee);
    }
    res.r[g] = std::min(ctx.rbar[g], ctx.gub[g] - res.p[g]);
    achieved += res.r[g];
  }
  t.shortfall = std::max(0.0, ctx.reserve_req - achieved);
  return res;
}

Eigen::VectorXd reserve_repair_backward(const ReserveTrace& trace,
                                        const RepairContext& ctx,
                                        const Eigen::VectorXd& dl_dp) {
  const int ng = ctx.n_gens();
  const bool inert = trace.argmin < 0;

  // Cotangent contractions with the per-unit shift profiles.
  double up_mix = 0.0;  // sum over up-set of g_i (knee_i - p_i)
  double dn_mix = 0.0;  // sum over down-set of g_i (p_i - knee_i)
  for (int g = 0; g < ng; ++g) {
    const double knee = ctx.gub[g] - ctx.rbar[g];
    if (trace.in_up_set[g]) {
      up_mix += dl_dp[g] * (knee - trace.p_tilde[g]);
    } else {
      dn_mix += dl_dp[g] * (trace.p_tilde[g] - knee);
    }
  }

  Eigen::VectorXd out(ng);
  for (int j = 0; j < ng; ++j) {
    // d(delta)/dp_j through the branch selected in the forward pass.
    double ddelta = 0.0;
    if (!inert) {
      if (trace.argmin == 0) {
        ddelta = trace.headroom_branch[j] ? 1.0 : 0.0;
      } else if (trace.argmin == 1) {
        ddelta = trace.in_up_set[j] ? -1.0 : 0.0;
      } else {
        ddelta = trace.in_up_set[j] ? 0.0 : 1.0;
      }
    }
    double dalpha_up = 0.0, dalpha_dn = 0.0;
    if (trace.delta_up > 0.0) {
      const double ddup = trace.in_up_set[j] ? -1.0 : 0.0;
      dalpha_up = (ddelta * trace.delta_up - trace.delta * ddup) /
                  (trace.delta_up * trace.delta_up);
    }
    if (trace.delta_dn > 0.0) {
      const double dddn = trace.in_up_set[j] ? 0.0 : 1.0;
      dalpha_dn = (ddelta * trace.delta_dn - trace.delta * dddn) /
                  (trace.delta_dn * trace.delta_dn);
    }
    const double alpha_j = trace.in_up_set[j] ? trace.alpha_up : trace.alpha_dn;
    out[j] = dl_dp[j] * (1.0 - alpha_j) + up_mix * dalpha_up - dn_mix * dalpha_dn;
  }
  return out;
}

CompletionResult equality_completion(const Eigen::VectorXd& p_partial,
                                     int residual, const RepairContext& ctx) {
  const int ng = ctx.n_gens();
  if (p_partial.size() != ng - 1) {
    throw ShapeMismatch("equality completion expects one fewer value than units");
  }
  CompletionResult res;
  res.p.resize(ng);
  int src = 0;
  double others = 0.0;
  for (int g = 0; g < ng; ++g) {
    if (g == residual) continue;
    res.p[g] = p_partial[src++];
    others += res.p[g];
  }
  res.p[residual] = ctx.total_load - others;
  res.bound_violation =
      std::max(0.0, res.p[residual] - ctx.gub[residual]) +
      std::max(0.0, ctx.glb[residual] - res.p[residual]);
  return res;
}

Eigen::VectorXd equality_completion_backward(const Eigen::VectorXd& dl_dp,
                                             int residual) {
  const int ng = static_cast<int>(dl_dp.size());
  Eigen::VectorXd out(ng - 1);
  int dst = 0;
  for (int g = 0; g < ng; ++g) {
    if (g == residual) continue;
    out[dst++] = dl_dp[g] - dl_dp[residual];
  }
  return out;
}

double default_correction_step(int n_gens) {
  // Hessian envelope of the squared violations is 4 * n_gens.
  return 0.2 / std::max(1, n_gens);
}

double correction_violation(const Eigen::VectorXd& p,
                            const RepairContext& ctx) {
  const double s = p.sum() - ctx.total_load;
  double provided = 0.0;
  for (int g = 0; g < ctx.n_gens(); ++g) {
    provided += std::min(ctx.rbar[g], ctx.gub[g] - p[g]);
  }
  const double sh = std::max(0.0, ctx.reserve_req - provided);
  return s * s + sh * sh;
}

Eigen::VectorXd unrolled_correction(const Eigen::VectorXd& p_hat,
                                    const RepairContext& ctx, int steps,
                                    double step_size, CorrectionTrace* trace) {
  const int ng = ctx.n_gens();
  Eigen::VectorXd p = p_hat.cwiseMax(ctx.glb).cwiseMin(ctx.gub);
  if (trace) {
    trace->steps.clear();
    trace->violation_history.clear();
    trace->initial_inside.resize(ng);
    for (int g = 0; g < ng; ++g) trace->initial_inside[g] = p[g] == p_hat[g];
    trace->violation_history.push_back(correction_violation(p, ctx));
  }
  for (int it = 0; it < steps; ++it) {
    CorrectionTrace::Step st;
    st.headroom_branch.resize(ng);
    st.inside_box.resize(ng);
    st.balance_residual = p.sum() - ctx.total_load;
    double provided = 0.0;
    for (int g = 0; g < ng; ++g) {
      const double headroom = ctx.gub[g] - p[g];
      st.headroom_branch[g] = headroom < ctx.rbar[g];
      provided += std::min(ctx.rbar[g], headroom);
    }
    const double sh = ctx.reserve_req - provided;
    st.shortfall_active = sh > 0.0;

    Eigen::VectorXd grad =
        Eigen::VectorXd::Constant(ng, 2.0 * st.balance_residual);
    if (st.shortfall_active) {
      for (int g = 0; g < ng; ++g) {
        if (st.headroom_branch[g]) grad[g] += 2.0 * sh;
      }
    }
    Eigen::VectorXd q = p - step_size * grad;
    for (int g = 0; g < ng; ++g) {
      const double clamped = std::clamp(q[g], ctx.glb[g], ctx.gub[g]);
      st.inside_box[g] = clamped == q[g];
      q[g] = clamped;
    }
    p = q;
    if (trace) {
      trace->steps.push_back(std::move(st));
      trace->violation_history.push_back(correction_violation(p, ctx));
    }
  }
  if (trace) trace->p_out = p;
  return p;
}

Eigen::VectorXd unrolled_correction_backward(const CorrectionTrace& trace,
                                             const RepairContext& ctx,
                                             double step_size,
                                             const Eigen::VectorXd& dl_dp) {
  Eigen::VectorXd g = dl_dp;
  for (auto it = trace.steps.rbegin(); it != trace.steps.rend(); ++it) {
    const auto& st = *it;
    for (int i = 0; i < g.size(); ++i) {
      if (!st.inside_box[i]) g[i] = 0.0;
    }
    // (I - 2 eta (1 1' + c m m'))' g with m the headroom-branch mask.
    const double ones_mix = g.sum();
    double m_mix = 0.0;
    if (st.shortfall_active) {
      for (int i = 0; i < g.size(); ++i) {
        if (st.headroom_branch[i]) m_mix += g[i];
      }
    }
    for (int i = 0; i < g.size(); ++i) {
      double adj = 2.0 * step_size * ones_mix;
      if (st.shortfall_active && st.headroom_branch[i]) {
        adj += 2.0 * step_size * m_mix;
      }
      g[i] -= adj;
    }
  }
  // Initial clamp of the raw prediction into the box.
  for (int i = 0; i < g.size(); ++i) {
    if (!trace.initial_inside[i]) g[i] = 0.0;
  }
  return g;
}

}  // namespace proxyflow

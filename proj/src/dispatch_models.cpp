#include "proxyflow/dispatch_models.hpp"

#include <algorithm>
#include <cmath>

namespace proxyflow {

namespace {

/// PTDF restricted to generator buses: flows = gen_ptdf * p - ptdf * d.
Eigen::MatrixXd gen_ptdf(const Network& net, const SensitivityMatrices& sens) {
  const auto gbus = net.gen_bus_indices();
  Eigen::MatrixXd gp(net.n_lines(), net.n_gens());
  for (int g = 0; g < net.n_gens(); ++g) gp.col(g) = sens.ptdf.col(gbus[g]);
  return gp;
}

}  // namespace

Eigen::VectorXd thermal_slacks(const Network& net,
                               const SensitivityMatrices& sens,
                               const Eigen::VectorXd& loads,
                               const Eigen::VectorXd& p) {
  Eigen::VectorXd inj = -loads;
  const auto gbus = net.gen_bus_indices();
  for (int g = 0; g < net.n_gens(); ++g) inj[gbus[g]] += p[g];
  const Eigen::VectorXd f = sens.ptdf * inj;
  Eigen::VectorXd xi(net.n_lines());
  for (int l = 0; l < net.n_lines(); ++l) {
    const double hi = net.lines[l].f_max;
    xi[l] = std::max(0.0, f[l] - hi) + std::max(0.0, -hi - f[l]);
  }
  return xi;
}

StandardLp build_ed_lp(const Network& net, const Instance& inst,
                       const SensitivityMatrices& sens,
                       const PenaltyPrices& prices) {
  const int ng = net.n_gens();
  const int nl = net.n_lines();
  const EffectiveFleet fleet = effective_fleet(net, inst);
  const Eigen::MatrixXd gp = gen_ptdf(net, sens);
  const Eigen::VectorXd flow_from_load = sens.ptdf * inst.loads;
  const double total_load = inst.total_load();
  const double reserve = inst.reserve_req;

  // Loose but finite envelopes keep every column box-bounded without ever
  // binding at an optimum.
  Eigen::VectorXd flow_env(nl);
  for (int l = 0; l < nl; ++l) {
    flow_env[l] = net.lines[l].f_max + std::abs(flow_from_load[l]) +
                  gp.row(l).cwiseAbs().dot(fleet.pmax) + 1.0;
  }

  const int n = 3 * ng + 3 * nl + 1;
  const int m = 2 + ng + 2 * nl;
  StandardLp lp;
  lp.a = Eigen::MatrixXd::Zero(m, n);
  lp.b = Eigen::VectorXd::Zero(m);
  lp.c = Eigen::VectorXd::Zero(n);
  lp.lb = Eigen::VectorXd::Zero(n);
  lp.ub = Eigen::VectorXd::Zero(n);
  lp.col_names.resize(n);
  lp.row_names.resize(m);

  // Column layout.
  const int col_p = 0;
  const int col_r = ng;
  const int col_xi = 2 * ng;
  const int col_sres = 2 * ng + nl;
  const int col_scap = col_sres + 1;
  const int col_sup = col_scap + ng;
  const int col_sdn = col_sup + nl;

  for (int g = 0; g < ng; ++g) {
    lp.c[col_p + g] = fleet.cost[g];
    lp.lb[col_p + g] = fleet.pmin[g];
    lp.ub[col_p + g] = fleet.pmax[g];
    lp.col_names[col_p + g] = "p" + std::to_string(g);

    lp.ub[col_r + g] = fleet.rmax[g];
    lp.col_names[col_r + g] = "r" + std::to_string(g);

    lp.ub[col_scap + g] = fleet.pmax[g] - fleet.pmin[g] + fleet.rmax[g];
    lp.col_names[col_scap + g] = "scap" + std::to_string(g);
  }
  for (int l = 0; l < nl; ++l) {
    lp.c[col_xi + l] = prices.m_th;
    lp.ub[col_xi + l] = flow_env[l];
    lp.col_names[col_xi + l] = "xi" + std::to_string(l);
    lp.ub[col_sup + l] = 3.0 * flow_env[l];
    lp.col_names[col_sup + l] = "sup" + std::to_string(l);
    lp.ub[col_sdn + l] = 3.0 * flow_env[l];
    lp.col_names[col_sdn + l] = "sdn" + std::to_string(l);
  }
  lp.ub[col_sres] = std::max(0.0, fleet.rmax.sum());
  lp.col_names[col_sres] = "sres";

  // Row 0: power balance.
  int row = 0;
  lp.row_names[row] = "balance";
  for (int g = 0; g < ng; ++g) lp.a(row, col_p + g) = 1.0;
  lp.b[row] = total_load;
  ++row;

  // Row 1: reserve requirement, 1'r - sres = R.
  lp.row_names[row] = "reserve";
  for (int g = 0; g < ng; ++g) lp.a(row, col_r + g) = 1.0;
  lp.a(row, col_sres) = -1.0;
  lp.b[row] = reserve;
  ++row;

  // p + r + scap = pmax.
  for (int g = 0; g < ng; ++g, ++row) {
    lp.row_names[row] = "cap" + std::to_string(g);
    lp.a(row, col_p + g) = 1.0;
    lp.a(row, col_r + g) = 1.0;
    lp.a(row, col_scap + g) = 1.0;
    lp.b[row] = fleet.pmax[g];
  }

  // Soft flow limits: gp p - xi + sup = fmax + flow_from_load and
  //                   gp p + xi - sdn = -fmax + flow_from_load.
  for (int l = 0; l < nl; ++l, ++row) {
    lp.row_names[row] = "fup" + std::to_string(l);
    lp.a.row(row).segment(col_p, ng) = gp.row(l);
    lp.a(row, col_xi + l) = -1.0;
    lp.a(row, col_sup + l) = 1.0;
    lp.b[row] = net.lines[l].f_max + flow_from_load[l];
  }
  for (int l = 0; l < nl; ++l, ++row) {
    lp.row_names[row] = "fdn" + std::to_string(l);
    lp.a.row(row).segment(col_p, ng) = gp.row(l);
    lp.a(row, col_xi + l) = 1.0;
    lp.a(row, col_sdn + l) = -1.0;
    lp.b[row] = -net.lines[l].f_max + flow_from_load[l];
  }
  return lp;
}

Dispatch solve_ed(const Network& net, const Instance& inst,
                  const SensitivityMatrices& sens,
                  const PenaltyPrices& prices) {
  const StandardLp lp = build_ed_lp(net, inst, sens, prices);
  const LpSolution sol = simplex_solve(lp);
  if (sol.status != SolveStatus::Optimal) {
    throw InfeasibleError("economic dispatch " + to_string(sol.status));
  }
  const int ng = net.n_gens();
  const int nl = net.n_lines();
  Dispatch out;
  out.p = sol.y.segment(0, ng);
  out.r = sol.y.segment(ng, ng);
  out.xi_th = sol.y.segment(2 * ng, nl);
  out.objective = sol.objective;
  out.status = SolveStatus::Optimal;
  out.dual_balance = sol.z[0];
  out.dual_reserve = sol.z[1];
  return out;
}

StandardLp build_dcopf_lp(const Network& net, const Instance& inst,
                          const SensitivityMatrices& sens) {
  const int ng = net.n_gens();
  const int nl = net.n_lines();
  const EffectiveFleet fleet = effective_fleet(net, inst);
  const Eigen::MatrixXd gp = gen_ptdf(net, sens);
  const Eigen::VectorXd flow_from_load = sens.ptdf * inst.loads;

  StandardLp lp;
  const int n = ng + nl;
  const int m = 1 + nl;
  lp.a = Eigen::MatrixXd::Zero(m, n);
  lp.b = Eigen::VectorXd::Zero(m);
  lp.c = Eigen::VectorXd::Zero(n);
  lp.lb = Eigen::VectorXd::Zero(n);
  lp.ub = Eigen::VectorXd::Zero(n);
  lp.col_names.resize(n);
  lp.row_names.resize(m);

  for (int g = 0; g < ng; ++g) {
    lp.c[g] = fleet.cost[g];
    lp.lb[g] = fleet.pmin[g];
    lp.ub[g] = fleet.pmax[g];
    lp.col_names[g] = "p" + std::to_string(g);
  }
  for (int l = 0; l < nl; ++l) {
    lp.lb[ng + l] = -net.lines[l].f_max;
    lp.ub[ng + l] = net.lines[l].f_max;
    lp.col_names[ng + l] = "f" + std::to_string(l);
  }

  lp.row_names[0] = "balance";
  for (int g = 0; g < ng; ++g) lp.a(0, g) = 1.0;
  lp.b[0] = inst.total_load();

  // f = gp p - ptdf d, written as gp p - f = ptdf d.
  for (int l = 0; l < nl; ++l) {
    lp.row_names[1 + l] = "flow" + std::to_string(l);
    lp.a.row(1 + l).segment(0, ng) = gp.row(l);
    lp.a(1 + l, ng + l) = -1.0;
    lp.b[1 + l] = flow_from_load[l];
  }
  return lp;
}

Dispatch solve_dcopf(const Network& net, const Instance& inst,
                     const SensitivityMatrices& sens) {
  const StandardLp lp = build_dcopf_lp(net, inst, sens);
  const LpSolution sol = simplex_solve(lp);
  if (sol.status != SolveStatus::Optimal) {
    throw InfeasibleError("dc-opf " + to_string(sol.status));
  }
  Dispatch out;
  out.p = sol.y.segment(0, net.n_gens());
  out.r = Eigen::VectorXd::Zero(net.n_gens());
  out.xi_th = Eigen::VectorXd::Zero(net.n_lines());
  out.objective = sol.objective;
  out.status = SolveStatus::Optimal;
  out.dual_balance = sol.z[0];
  return out;
}

Dispatch projection_repair(const Network& net, const Instance& inst,
                           const SensitivityMatrices& sens,
                           const Eigen::VectorXd& p_hat,
                           const PenaltyPrices& prices) {
  const int ng = net.n_gens();
  if (p_hat.size() != ng) {
    throw ShapeMismatch("projection input size does not match fleet");
  }
  if (!p_hat.allFinite()) {
    throw ValidationError({"projection input is not finite"});
  }
  const EffectiveFleet fleet = effective_fleet(net, inst);

  // min sum(dev+ + dev-)  s.t.  p - dev+ + dev- = p_hat, balance, reserve,
  // capacity. Thermal limits are soft in the target model, so they never
  // restrict the projection; xi is read out afterwards.
  const int n = 4 * ng + 1 + ng;  // p, dev+, dev-, r, sres, scap
  const int m = ng + 2 + ng;
  StandardLp lp;
  lp.a = Eigen::MatrixXd::Zero(m, n);
  lp.b = Eigen::VectorXd::Zero(m);
  lp.c = Eigen::VectorXd::Zero(n);
  lp.lb = Eigen::VectorXd::Zero(n);
  lp.ub = Eigen::VectorXd::Zero(n);
  lp.col_names.assign(n, "");
  lp.row_names.assign(m, "");

  const int col_p = 0, col_dp = ng, col_dm = 2 * ng, col_r = 3 * ng;
  const int col_sres = 4 * ng, col_scap = 4 * ng + 1;

  for (int g = 0; g < ng; ++g) {
    lp.lb[col_p + g] = fleet.pmin[g];
    lp.ub[col_p + g] = fleet.pmax[g];
    lp.col_names[col_p + g] = "p" + std::to_string(g);
    const double span =
        std::abs(fleet.pmax[g] - p_hat[g]) + std::abs(p_hat[g] - fleet.pmin[g]) + 1.0;
    lp.c[col_dp + g] = 1.0;
    lp.ub[col_dp + g] = span;
    lp.col_names[col_dp + g] = "dev+" + std::to_string(g);
    lp.c[col_dm + g] = 1.0;
    lp.ub[col_dm + g] = span;
    lp.col_names[col_dm + g] = "dev-" + std::to_string(g);
    lp.ub[col_r + g] = fleet.rmax[g];
    lp.col_names[col_r + g] = "r" + std::to_string(g);
    lp.ub[col_scap + g] = fleet.pmax[g] - fleet.pmin[g] + fleet.rmax[g];
    lp.col_names[col_scap + g] = "scap" + std::to_string(g);
  }
  lp.ub[col_sres] = std::max(0.0, fleet.rmax.sum());
  lp.col_names[col_sres] = "sres";

  int row = 0;
  for (int g = 0; g < ng; ++g, ++row) {
    lp.row_names[row] = "dev" + std::to_string(g);
    lp.a(row, col_p + g) = 1.0;
    lp.a(row, col_dp + g) = -1.0;
    lp.a(row, col_dm + g) = 1.0;
    lp.b[row] = p_hat[g];
  }
  lp.row_names[row] = "balance";
  for (int g = 0; g < ng; ++g) lp.a(row, col_p + g) = 1.0;
  lp.b[row] = inst.total_load();
  ++row;
  lp.row_names[row] = "reserve";
  for (int g = 0; g < ng; ++g) lp.a(row, col_r + g) = 1.0;
  lp.a(row, col_sres) = -1.0;
  lp.b[row] = inst.reserve_req;
  ++row;
  for (int g = 0; g < ng; ++g, ++row) {
    lp.row_names[row] = "cap" + std::to_string(g);
    lp.a(row, col_p + g) = 1.0;
    lp.a(row, col_r + g) = 1.0;
    lp.a(row, col_scap + g) = 1.0;
    lp.b[row] = fleet.pmax[g];
  }

  const LpSolution sol = simplex_solve(lp);
  if (sol.status != SolveStatus::Optimal) {
    throw InfeasibleError("projection target set is empty");
  }
  Dispatch out;
  out.p = sol.y.segment(col_p, ng);
  out.r = sol.y.segment(col_r, ng);
  out.xi_th = thermal_slacks(net, sens, inst.loads, out.p);
  out.objective =
      fleet.cost.dot(out.p) + prices.m_th * out.xi_th.lpNorm<1>();
  out.status = SolveStatus::Optimal;
  return out;
}

double max_reserve_capability(const Network& net, const Instance& inst) {
  const int ng = net.n_gens();
  const EffectiveFleet fleet = effective_fleet(net, inst);

  // max sum(t)  s.t.  1'p = load, t <= rmax, p + t + s = pmax, boxes.
  const int n = 3 * ng;
  const int m = 1 + ng;
  StandardLp lp;
  lp.a = Eigen::MatrixXd::Zero(m, n);
  lp.b = Eigen::VectorXd::Zero(m);
  lp.c = Eigen::VectorXd::Zero(n);
  lp.lb = Eigen::VectorXd::Zero(n);
  lp.ub = Eigen::VectorXd::Zero(n);
  for (int g = 0; g < ng; ++g) {
    lp.lb[g] = fleet.pmin[g];
    lp.ub[g] = fleet.pmax[g];
    lp.c[ng + g] = -1.0;  // maximize total reserve margin
    lp.ub[ng + g] = fleet.rmax[g];
    lp.ub[2 * ng + g] = fleet.pmax[g] - fleet.pmin[g] + fleet.rmax[g];
  }
  for (int g = 0; g < ng; ++g) lp.a(0, g) = 1.0;
  lp.b[0] = inst.total_load();
  for (int g = 0; g < ng; ++g) {
    lp.a(1 + g, g) = 1.0;
    lp.a(1 + g, ng + g) = 1.0;
    lp.a(1 + g, 2 * ng + g) = 1.0;
    lp.b[1 + g] = fleet.pmax[g];
  }
  const LpSolution sol = simplex_solve(lp);
  if (sol.status != SolveStatus::Optimal) {
    throw InfeasibleError("no balanced in-box dispatch exists");
  }
  return -sol.objective;
}

bool reserve_satisfiable(const Network& net, const Instance& inst,
                         double tol) {
  try {
    return max_reserve_capability(net, inst) >= inst.reserve_req - tol;
  } catch (const InfeasibleError&) {
    return false;
  }
}

PenalizedObjective penalized_objective(const Network& net,
                                       const Instance& inst,
                                       const SensitivityMatrices& sens,
                                       const Eigen::VectorXd& p,
                                       const PenaltyPrices& prices) {
  const EffectiveFleet fleet = effective_fleet(net, inst);
  PenalizedObjective po;
  po.cost = fleet.cost.dot(p);
  const Eigen::VectorXd xi = thermal_slacks(net, sens, inst.loads, p);
  po.thermal = prices.m_th * xi.lpNorm<1>();
  po.max_thermal = xi.size() ? xi.maxCoeff() : 0.0;
  po.balance_violation = std::abs(p.sum() - inst.total_load());
  po.balance = prices.m_pb * po.balance_violation;
  const Eigen::VectorXd headroom = fleet.rmax.cwiseMin(fleet.pmax - p);
  po.reserve_shortfall = std::max(0.0, inst.reserve_req - headroom.sum());
  po.reserve = prices.m_r * po.reserve_shortfall;
  po.total = po.cost + po.thermal + po.balance + po.reserve;
  return po;
}

}  // namespace proxyflow

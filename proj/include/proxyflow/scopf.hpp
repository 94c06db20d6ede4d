#pragma once

#include <Eigen/Dense>
#include <vector>

#include "proxyflow/dispatch_models.hpp"
#include "proxyflow/instance.hpp"
#include "proxyflow/network.hpp"
#include "proxyflow/sensitivity.hpp"

namespace proxyflow {

/// Contingency sets for the security-constrained dispatch. Generator
/// entries index `net.generators`; line entries index `net.lines` and must
/// be non-radial.
struct ScopfSpec {
  std::vector<int> gen_outages;
  std::vector<int> line_outages;
  double slack_penalty = 1500.0;  // $/MWh on every thermal slack block

  static ScopfSpec all_n_minus_1(const Network& net,
                                 const SensitivityMatrices& sens);
};

struct ScopfSolution {
  Eigen::VectorXd p;                   // base dispatch
  std::vector<Eigen::VectorXd> p_k;    // dispatch under each generator outage
  Eigen::VectorXd n_k;                 // system response signal per outage
  std::vector<Eigen::VectorXi> rho_k;  // 1 where the response saturates
  Eigen::VectorXd xi_base;             // per-line MW
  std::vector<Eigen::VectorXd> xi_gen;
  std::vector<Eigen::VectorXd> xi_line;
  double objective = 0.0;
  SolveStatus status = SolveStatus::Infeasible;
};

/// Exact oracle for tiny cases: enumerates every saturation pattern of the
/// droop response, solves the LP restriction for each, and keeps the best.
/// Preconditions: at most 6 generators and 6 generator outages, and the
/// total pattern count must stay within the enumeration budget
/// (BudgetExceeded otherwise). Throws InfeasibleError when no pattern
/// admits a feasible point.
ScopfSolution solve_scopf_bruteforce(const Network& net, const Instance& inst,
                                     const SensitivityMatrices& sens,
                                     const ScopfSpec& spec);

/// Thermal slacks of the post-outage flows f + f_k * lodf_k for line
/// contingency k, given base flows f (MW).
Eigen::VectorXd line_outage_slacks(const Network& net,
                                   const SensitivityMatrices& sens,
                                   const Eigen::VectorXd& base_flows, int k);

}  // namespace proxyflow

#include "proxyflow/scopf.hpp"

#include <cmath>
#include <limits>

namespace proxyflow {

ScopfSpec ScopfSpec::all_n_minus_1(const Network& net,
                                   const SensitivityMatrices& sens) {
  ScopfSpec spec;
  for (int g = 0; g < net.n_gens(); ++g) spec.gen_outages.push_back(g);
  spec.line_outages = contingency_lines(sens, net);
  return spec;
}

Eigen::VectorXd line_outage_slacks(const Network& net,
                                   const SensitivityMatrices& sens,
                                   const Eigen::VectorXd& base_flows, int k) {
  const Eigen::VectorXd lodf_k = lodf_column(sens, k);
  Eigen::VectorXd xi(net.n_lines());
  for (int l = 0; l < net.n_lines(); ++l) {
    const double f = base_flows[l] + base_flows[k] * lodf_k[l];
    const double hi = net.lines[l].f_max;
    xi[l] = std::max(0.0, f - hi) + std::max(0.0, -hi - f);
  }
  return xi;
}

namespace {

constexpr long kPatternBudget = 1L << 16;

struct GenPtdfData {
  Eigen::MatrixXd gp;              // lines x gens
  Eigen::VectorXd flow_from_load;  // ptdf * d
};

GenPtdfData make_gen_ptdf(const Network& net, const SensitivityMatrices& sens,
                          const Instance& inst) {
  GenPtdfData d;
  const auto gbus = net.gen_bus_indices();
  d.gp.resize(net.n_lines(), net.n_gens());
  for (int g = 0; g < net.n_gens(); ++g) d.gp.col(g) = sens.ptdf.col(gbus[g]);
  d.flow_from_load = sens.ptdf * inst.loads;
  return d;
}

/// Builds and solves the LP restriction of the extensive model for one
/// saturation pattern. `pattern[k][i]` = 1 fixes generator i at its upper
/// bound under outage k.
class PatternLp {
 public:
  PatternLp(const Network& net, const Instance& inst,
            const SensitivityMatrices& sens, const ScopfSpec& spec,
            const GenPtdfData& data)
      : net_(net),
        inst_(inst),
        sens_(sens),
        spec_(spec),
        data_(data),
        fleet_(effective_fleet(net, inst)) {
    ng_ = net.n_gens();
    nl_ = net.n_lines();
    nk_ = static_cast<int>(spec.gen_outages.size());
    ne_ = static_cast<int>(spec.line_outages.size());
    for (int e : spec.line_outages) lodf_cols_.push_back(lodf_column(sens, e));

    flow_env_.resize(nl_);
    for (int l = 0; l < nl_; ++l) {
      flow_env_[l] = net.lines[l].f_max + std::abs(data.flow_from_load[l]) +
                     data.gp.row(l).cwiseAbs().dot(fleet_.pmax) + 1.0;
    }
    // Post line-outage flows combine two rows of the PTDF map.
    outage_env_.resize(nl_, ne_);
    for (int e = 0; e < ne_; ++e) {
      const int k = spec.line_outages[e];
      for (int l = 0; l < nl_; ++l) {
        outage_env_(l, e) = flow_env_[l] + std::abs(lodf_cols_[e][l]) * flow_env_[k] + 1.0;
      }
    }
  }

  /// Solves the restriction; returns nullopt-like status via sol.status.
  LpSolution solve(const std::vector<std::vector<int>>& pattern,
                   StandardLp* lp_out) {
    StandardLp lp = build(pattern);
    LpSolution sol = simplex_solve(lp);
    if (lp_out) *lp_out = std::move(lp);
    return sol;
  }

  int col_p() const { return 0; }
  int col_nk(int kk) const { return ng_ + kk; }
  int col_pk(int kk, int i) const { return ng_ + nk_ + kk * ng_ + i; }
  int col_xi0(int l) const { return ng_ + nk_ + nk_ * ng_ + l; }
  int col_xik(int kk, int l) const { return col_xi0(nl_) + kk * nl_ + l; }
  int col_xie(int e, int l) const { return col_xik(nk_, 0) + e * nl_ + l; }
  int n_core_cols() const { return col_xie(ne_, 0); }

 private:
  StandardLp build(const std::vector<std::vector<int>>& pattern) {
    // Column count: core block plus one slack per inequality row.
    std::vector<double> slack_caps;
    const int rows_flow = 2 * nl_ * (1 + nk_ + ne_);
    int rows_apr = 0;
    for (int kk = 0; kk < nk_; ++kk) {
      const int k = spec_.gen_outages[kk];
      for (int i = 0; i < ng_; ++i) {
        if (i == k) continue;
        rows_apr += (pattern[kk][i] == 1) ? 2 : 1;
      }
    }
    const int rows_bal = 1 + nk_;
    const int m = rows_bal + rows_apr + rows_flow;
    int n_ineq = rows_flow;
    for (int kk = 0; kk < nk_; ++kk) {
      const int k = spec_.gen_outages[kk];
      for (int i = 0; i < ng_; ++i) {
        if (i != k && pattern[kk][i] == 1) n_ineq += 2;
      }
    }
    const int n = n_core_cols() + n_ineq;

    StandardLp lp;
    lp.a = Eigen::MatrixXd::Zero(m, n);
    lp.b = Eigen::VectorXd::Zero(m);
    lp.c = Eigen::VectorXd::Zero(n);
    lp.lb = Eigen::VectorXd::Zero(n);
    lp.ub = Eigen::VectorXd::Zero(n);
    lp.col_names.assign(n, "");
    lp.row_names.assign(m, "");

    // Core columns.
    for (int g = 0; g < ng_; ++g) {
      lp.c[col_p() + g] = fleet_.cost[g];
      lp.lb[col_p() + g] = fleet_.pmin[g];
      lp.ub[col_p() + g] = fleet_.pmax[g];
      lp.col_names[col_p() + g] = "p" + std::to_string(g);
    }
    for (int kk = 0; kk < nk_; ++kk) {
      const int k = spec_.gen_outages[kk];
      lp.ub[col_nk(kk)] = 1.0;
      lp.col_names[col_nk(kk)] = "n" + std::to_string(k);
      for (int i = 0; i < ng_; ++i) {
        const int j = col_pk(kk, i);
        lp.col_names[j] = "p" + std::to_string(k) + "," + std::to_string(i);
        if (i == k) {
          lp.lb[j] = lp.ub[j] = 0.0;  // outaged unit
        } else if (pattern[kk][i] == 1) {
          lp.lb[j] = lp.ub[j] = fleet_.pmax[i];  // saturated response
        } else {
          lp.lb[j] = fleet_.pmin[i];
          lp.ub[j] = fleet_.pmax[i];
        }
      }
    }
    auto set_xi = [&](int j, int l, const std::string& name, double env) {
      lp.c[j] = spec_.slack_penalty;
      lp.ub[j] = env;
      lp.col_names[j] = name + std::to_string(l);
    };
    for (int l = 0; l < nl_; ++l) set_xi(col_xi0(l), l, "xi0_", flow_env_[l]);
    for (int kk = 0; kk < nk_; ++kk) {
      for (int l = 0; l < nl_; ++l) {
        set_xi(col_xik(kk, l), l, "xik" + std::to_string(kk) + "_",
               flow_env_[l]);
      }
    }
    for (int e = 0; e < ne_; ++e) {
      for (int l = 0; l < nl_; ++l) {
        set_xi(col_xie(e, l), l, "xie" + std::to_string(e) + "_",
               outage_env_(l, e));
      }
    }

    int row = 0;
    int next_slack = n_core_cols();
    auto add_ineq_slack = [&](int r, double sign, double cap,
                              const std::string& name) {
      lp.a(r, next_slack) = sign;
      lp.ub[next_slack] = cap;
      lp.col_names[next_slack] = name;
      ++next_slack;
    };

    // Base balance.
    lp.row_names[row] = "bal0";
    for (int g = 0; g < ng_; ++g) lp.a(row, col_p() + g) = 1.0;
    lp.b[row] = inst_.total_load();
    ++row;

    // Contingency balances.
    for (int kk = 0; kk < nk_; ++kk) {
      lp.row_names[row] = "bal_k" + std::to_string(kk);
      for (int i = 0; i < ng_; ++i) lp.a(row, col_pk(kk, i)) = 1.0;
      lp.b[row] = inst_.total_load();
      ++row;
    }

    // Droop response coupling.
    for (int kk = 0; kk < nk_; ++kk) {
      const int k = spec_.gen_outages[kk];
      for (int i = 0; i < ng_; ++i) {
        if (i == k) continue;
        const double slope = fleet_.gamma[i] * fleet_.capacity()[i];
        if (pattern[kk][i] == 0) {
          // p_{k,i} - p_i - n_k slope = 0
          lp.row_names[row] = "apr_eq" + std::to_string(kk) + "_" + std::to_string(i);
          lp.a(row, col_pk(kk, i)) = 1.0;
          lp.a(row, col_p() + i) = -1.0;
          lp.a(row, col_nk(kk)) = -slope;
          lp.b[row] = 0.0;
          ++row;
        } else {
          // Saturation requires the target at or above pmax ...
          lp.row_names[row] = "apr_lo" + std::to_string(kk) + "_" + std::to_string(i);
          lp.a(row, col_p() + i) = 1.0;
          lp.a(row, col_nk(kk)) = slope;
          add_ineq_slack(row, -1.0, fleet_.pmax[i] + slope + 1.0, "sapr_lo");
          lp.b[row] = fleet_.pmax[i];
          ++row;
          // ... but no further than one full capacity past it.
          lp.row_names[row] = "apr_hi" + std::to_string(kk) + "_" + std::to_string(i);
          lp.a(row, col_p() + i) = 1.0;
          lp.a(row, col_nk(kk)) = slope;
          add_ineq_slack(row, 1.0, fleet_.pmax[i] + slope + 1.0, "sapr_hi");
          lp.b[row] = fleet_.pmax[i] + fleet_.capacity()[i];
          ++row;
        }
      }
    }

    // Soft thermal limits: base, generator outages, line outages.
    auto add_flow_rows = [&](const Eigen::RowVectorXd& coeff_p, int p_offset,
                             int xi_col, double rhs_shift, double env, int l,
                             const std::string& tag) {
      lp.row_names[row] = tag + "_up" + std::to_string(l);
      lp.a.row(row).segment(p_offset, ng_) = coeff_p;
      lp.a(row, xi_col) = -1.0;
      add_ineq_slack(row, 1.0, 3.0 * env, "s" + tag + "_up");
      lp.b[row] = net_.lines[l].f_max + rhs_shift;
      ++row;
      lp.row_names[row] = tag + "_dn" + std::to_string(l);
      lp.a.row(row).segment(p_offset, ng_) = coeff_p;
      lp.a(row, xi_col) = 1.0;
      add_ineq_slack(row, -1.0, 3.0 * env, "s" + tag + "_dn");
      lp.b[row] = -net_.lines[l].f_max + rhs_shift;
      ++row;
    };

    for (int l = 0; l < nl_; ++l) {
      add_flow_rows(data_.gp.row(l), col_p(), col_xi0(l),
                    data_.flow_from_load[l], flow_env_[l], l, "f0");
    }
    for (int kk = 0; kk < nk_; ++kk) {
      for (int l = 0; l < nl_; ++l) {
        add_flow_rows(data_.gp.row(l), col_pk(kk, 0), col_xik(kk, l),
                      data_.flow_from_load[l], flow_env_[l], l,
                      "fk" + std::to_string(kk));
      }
    }
    for (int e = 0; e < ne_; ++e) {
      const int k = spec_.line_outages[e];
      for (int l = 0; l < nl_; ++l) {
        const Eigen::RowVectorXd coeff =
            data_.gp.row(l) + lodf_cols_[e][l] * data_.gp.row(k);
        const double shift =
            data_.flow_from_load[l] + lodf_cols_[e][l] * data_.flow_from_load[k];
        add_flow_rows(coeff, col_p(), col_xie(e, l), shift, outage_env_(l, e),
                      l, "fe" + std::to_string(e));
      }
    }
    return lp;
  }

  const Network& net_;
  const Instance& inst_;
  const SensitivityMatrices& sens_;
  const ScopfSpec& spec_;
  const GenPtdfData& data_;
  EffectiveFleet fleet_;
  int ng_, nl_, nk_, ne_;
  std::vector<Eigen::VectorXd> lodf_cols_;
  Eigen::VectorXd flow_env_;
  Eigen::MatrixXd outage_env_;
};

}  // namespace

ScopfSolution solve_scopf_bruteforce(const Network& net, const Instance& inst,
                                     const SensitivityMatrices& sens,
                                     const ScopfSpec& spec) {
  const int ng = net.n_gens();
  const int nk = static_cast<int>(spec.gen_outages.size());
  if (ng > 6 || nk > 6) {
    throw BudgetExceeded("enumeration oracle limited to 6 generators and 6 outages");
  }
  const int bits_per_outage = ng - 1;
  long patterns = 1;
  for (int kk = 0; kk < nk; ++kk) {
    patterns <<= bits_per_outage;
    if (patterns > kPatternBudget) {
      throw BudgetExceeded("saturation pattern count exceeds enumeration budget");
    }
  }

  const GenPtdfData data = make_gen_ptdf(net, sens, inst);
  PatternLp builder(net, inst, sens, spec, data);

  ScopfSolution best;
  best.objective = std::numeric_limits<double>::infinity();
  best.status = SolveStatus::Infeasible;

  std::vector<std::vector<int>> pattern(nk, std::vector<int>(ng, 0));
  for (long code = 0; code < patterns; ++code) {
    long bits = code;
    for (int kk = 0; kk < nk; ++kk) {
      const int k = spec.gen_outages[kk];
      for (int i = 0; i < ng; ++i) {
        if (i == k) {
          pattern[kk][i] = 0;
          continue;
        }
        pattern[kk][i] = static_cast<int>(bits & 1);
        bits >>= 1;
      }
    }
    const LpSolution sol = builder.solve(pattern, nullptr);
    if (sol.status != SolveStatus::Optimal) continue;
    if (sol.objective < best.objective - 1e-9) {
      best.objective = sol.objective;
      best.status = SolveStatus::Optimal;
      best.p = sol.y.segment(builder.col_p(), ng);
      best.p_k.assign(nk, Eigen::VectorXd(ng));
      best.n_k.resize(nk);
      best.rho_k.assign(nk, Eigen::VectorXi::Zero(ng));
      for (int kk = 0; kk < nk; ++kk) {
        best.n_k[kk] = sol.y[builder.col_nk(kk)];
        for (int i = 0; i < ng; ++i) {
          best.p_k[kk][i] = sol.y[builder.col_pk(kk, i)];
          best.rho_k[kk][i] = pattern[kk][i];
        }
      }
      best.xi_base.resize(net.n_lines());
      for (int l = 0; l < net.n_lines(); ++l) {
        best.xi_base[l] = sol.y[builder.col_xi0(l)];
      }
      best.xi_gen.assign(nk, Eigen::VectorXd(net.n_lines()));
      for (int kk = 0; kk < nk; ++kk) {
        for (int l = 0; l < net.n_lines(); ++l) {
          best.xi_gen[kk][l] = sol.y[builder.col_xik(kk, l)];
        }
      }
      const int ne = static_cast<int>(spec.line_outages.size());
      best.xi_line.assign(ne, Eigen::VectorXd(net.n_lines()));
      for (int e = 0; e < ne; ++e) {
        for (int l = 0; l < net.n_lines(); ++l) {
          best.xi_line[e][l] = sol.y[builder.col_xie(e, l)];
        }
      }
    }
  }

  if (best.status != SolveStatus::Optimal) {
    throw InfeasibleError("no saturation pattern admits a feasible point");
  }
  return best;
}

}  // namespace proxyflow

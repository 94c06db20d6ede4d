#include "proxyflow/sensitivity.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>

namespace proxyflow {

SensitivityMatrices compute_ptdf(const Network& net) {
  const int nb = net.n_buses();
  const int nl = net.n_lines();
  const int slack = net.slack_index();

  // Bus susceptance Laplacian and the angle-to-flow map.
  Eigen::MatrixXd laplacian = Eigen::MatrixXd::Zero(nb, nb);
  Eigen::MatrixXd bf = Eigen::MatrixXd::Zero(nl, nb);
  for (int l = 0; l < nl; ++l) {
    const Line& ln = net.lines[l];
    const int i = net.bus_index(ln.from);
    const int j = net.bus_index(ln.to);
    const double b = ln.susceptance;
    laplacian(i, i) += b;
    laplacian(j, j) += b;
    laplacian(i, j) -= b;
    laplacian(j, i) -= b;
    bf(l, i) = b;
    bf(l, j) = -b;
  }

  // Drop the slack row/column.
  const int nr = nb - 1;
  Eigen::MatrixXd b_red(nr, nr);
  Eigen::MatrixXd bf_red(nl, nr);
  std::vector<int> keep;
  keep.reserve(nr);
  for (int b = 0; b < nb; ++b) {
    if (b != slack) keep.push_back(b);
  }
  for (int r = 0; r < nr; ++r) {
    bf_red.col(r) = bf.col(keep[r]);
    for (int c = 0; c < nr; ++c) b_red(r, c) = laplacian(keep[r], keep[c]);
  }

  SensitivityMatrices sens;
  sens.ptdf = Eigen::MatrixXd::Zero(nl, nb);
  if (nr == 0) return sens;  // single-bus grid: all factors zero

  Eigen::FullPivLU<Eigen::MatrixXd> lu(b_red);
  lu.setThreshold(1e-10);
  if (lu.rank() < nr) {
    throw SingularTopology("reduced susceptance matrix is singular");
  }
  // B_red is symmetric, so PTDF_red^T = B_red^{-1} Bf_red^T.
  Eigen::MatrixXd ptdf_red_t = lu.solve(bf_red.transpose());
  for (int r = 0; r < nr; ++r) sens.ptdf.col(keep[r]) = ptdf_red_t.row(r);
  sens.ptdf.col(slack).setZero();
  return sens;
}

namespace {

// Flow induced on line l by 1 MW injected at from(k) and withdrawn at to(k).
double transfer_factor(const SensitivityMatrices& sens, const Network& net,
                       int l, int k) {
  const int from = net.bus_index(net.lines[k].from);
  const int to = net.bus_index(net.lines[k].to);
  return sens.ptdf(l, from) - sens.ptdf(l, to);
}

}  // namespace

void compute_lodf(SensitivityMatrices& sens, const Network& net) {
  const int nl = net.n_lines();
  sens.lodf = Eigen::MatrixXd::Zero(nl, nl);
  sens.radial_lines.clear();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (int k = 0; k < nl; ++k) {
    const double denom = 1.0 - transfer_factor(sens, net, k, k);
    if (std::abs(denom) < 1e-9) {
      sens.lodf.col(k).setConstant(nan);
      sens.radial_lines.push_back(k);
      continue;
    }
    for (int l = 0; l < nl; ++l) {
      sens.lodf(l, k) =
          (l == k) ? -1.0 : transfer_factor(sens, net, l, k) / denom;
    }
  }
}

Eigen::VectorXd lodf_column(const SensitivityMatrices& sens, int k) {
  if (!sens.has_lodf()) {
    throw Error("lodf_column: LODF not computed");
  }
  for (int r : sens.radial_lines) {
    if (r == k) throw RadialLine(k);
  }
  return sens.lodf.col(k);
}

std::vector<int> contingency_lines(const SensitivityMatrices& sens,
                                   const Network& net) {
  std::vector<int> keep;
  for (int k = 0; k < net.n_lines(); ++k) {
    bool radial = false;
    for (int r : sens.radial_lines) radial |= (r == k);
    if (!radial) keep.push_back(k);
  }
  return keep;
}

}  // namespace proxyflow

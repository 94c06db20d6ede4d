#pragma once

#include <Eigen/Dense>
#include <vector>

#include "proxyflow/network.hpp"

namespace proxyflow {

/// Dense injection-shift and outage-redistribution factors.
///
/// ptdf(l, b) is the MW flow induced on line l by 1 MW injected at bus b and
/// withdrawn at the slack; the slack column is exactly zero by convention.
/// lodf(l, k) redistributes the pre-outage flow of line k onto line l;
/// lodf(k, k) = -1 so the outaged line nets to zero. Columns of radial lines
/// are undefined (NaN) and the line indices are listed in `radial_lines`.
struct SensitivityMatrices {
  Eigen::MatrixXd ptdf;  // lines x buses
  Eigen::MatrixXd lodf;  // lines x lines, empty until compute_lodf
  std::vector<int> radial_lines;

  bool has_lodf() const { return lodf.size() > 0; }
};

/// PTDF from the DC susceptance Laplacian with the slack row/column removed.
/// Throws SingularTopology when the reduced Laplacian is numerically singular.
SensitivityMatrices compute_ptdf(const Network& net);

/// Fills `sens.lodf` from the PTDF. Radial outages (islanding) get NaN
/// columns and are recorded in `sens.radial_lines`.
void compute_lodf(SensitivityMatrices& sens, const Network& net);

/// Column k of the LODF matrix; throws RadialLine(k) for islanding outages.
Eigen::VectorXd lodf_column(const SensitivityMatrices& sens, int k);

/// Line indices eligible as outage contingencies (non-radial).
std::vector<int> contingency_lines(const SensitivityMatrices& sens,
                                   const Network& net);

/// Flows for a per-bus injection vector (MW, positive = injection).
inline Eigen::VectorXd dc_flows(const SensitivityMatrices& sens,
                                const Eigen::VectorXd& injection) {
  return sens.ptdf * injection;
}

}  // namespace proxyflow

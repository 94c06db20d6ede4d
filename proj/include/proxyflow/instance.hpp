#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "proxyflow/network.hpp"
#include "proxyflow/rng.hpp"

namespace proxyflow {

/// One parametric problem input: loads, reserve requirement, and optional
/// per-generator cost / upper-bound multipliers.
struct Instance {
  Eigen::VectorXd loads;       // per-bus MW
  double reserve_req = 0.0;    // MW
  Eigen::VectorXd cost_scale;  // per-gen multiplier, all 1 unless perturbed
  Eigen::VectorXd pmax_scale;  // per-gen multiplier
  std::uint64_t rng_seed = 0;

  double total_load() const { return loads.sum(); }
};

/// Generator data with the instance multipliers applied.
struct EffectiveFleet {
  Eigen::VectorXd pmin;
  Eigen::VectorXd pmax;
  Eigen::VectorXd rmax;
  Eigen::VectorXd cost;
  Eigen::VectorXd gamma;

  Eigen::VectorXd capacity() const { return pmax - pmin; }
};

EffectiveFleet effective_fleet(const Network& net, const Instance& inst);

struct SamplerConfig {
  double gamma_lo = 0.8;
  double gamma_hi = 1.2;
  double eta_sd = 0.05;      // lognormal sd around mean 1
  double reserve_lo = 1.0;   // x largest generator
  double reserve_hi = 2.0;
  bool perturb_costs = false;  // also draw cost/pmax multipliers
  double scale_lo = 0.9;
  double scale_hi = 1.1;
};

/// Draws one instance: loads d_i = gamma * eta_i * base_i, reserve
/// requirement uniform in [reserve_lo, reserve_hi] x max pmax, and, when
/// `perturb_costs` is set, per-generator cost / pmax multipliers.
Instance sample_instance(const Network& net, const Eigen::VectorXd& base_loads,
                         const SamplerConfig& cfg, std::uint64_t seed);

/// Sets r_max = alpha_r * p_max with alpha_r = 5 max(pmax) / sum(pmax),
/// clipped to 1 so r_max <= p_max holds on small fleets. Throws
/// DegenerateFleet when the fleet has zero capacity.
Network set_reserve_capacities(Network net);

}  // namespace proxyflow

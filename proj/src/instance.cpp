#include "proxyflow/instance.hpp"

#include <algorithm>

namespace proxyflow {

EffectiveFleet effective_fleet(const Network& net, const Instance& inst) {
  const int ng = net.n_gens();
  EffectiveFleet f;
  f.pmin = net.gen_pmin();
  f.pmax = net.gen_pmax();
  f.rmax = net.gen_rmax();
  f.cost = net.gen_cost();
  f.gamma = net.gen_gamma();
  if (inst.cost_scale.size() == ng) {
    f.cost = f.cost.cwiseProduct(inst.cost_scale);
  }
  if (inst.pmax_scale.size() == ng) {
    f.pmax = f.pmax.cwiseProduct(inst.pmax_scale);
    f.pmin = f.pmin.cwiseMin(f.pmax);
  }
  f.rmax = f.rmax.cwiseMin(f.pmax);
  return f;
}

Instance sample_instance(const Network& net, const Eigen::VectorXd& base_loads,
                         const SamplerConfig& cfg, std::uint64_t seed) {
  if (base_loads.size() != net.n_buses()) {
    throw ShapeMismatch("base_loads size does not match bus count");
  }
  Rng rng(seed);
  Instance inst;
  inst.rng_seed = seed;

  const double gamma = rng.uniform(cfg.gamma_lo, cfg.gamma_hi);
  const auto ln = lognormal_from_mean_sd(1.0, cfg.eta_sd);
  inst.loads.resize(net.n_buses());
  for (int i = 0; i < net.n_buses(); ++i) {
    const double eta =
        cfg.eta_sd > 0.0 ? rng.lognormal(ln.mu, ln.sigma) : 1.0;
    inst.loads[i] = gamma * eta * base_loads[i];
  }

  const double largest = net.n_gens() ? net.gen_pmax().maxCoeff() : 0.0;
  inst.reserve_req = rng.uniform(cfg.reserve_lo, cfg.reserve_hi) * largest;

  if (cfg.perturb_costs) {
    inst.cost_scale.resize(net.n_gens());
    inst.pmax_scale.resize(net.n_gens());
    for (int g = 0; g < net.n_gens(); ++g) {
      inst.cost_scale[g] = rng.uniform(cfg.scale_lo, cfg.scale_hi);
    }
    for (int g = 0; g < net.n_gens(); ++g) {
      inst.pmax_scale[g] = rng.uniform(cfg.scale_lo, cfg.scale_hi);
    }
  }
  return inst;
}

Network set_reserve_capacities(Network net) {
  if (net.generators.empty()) {
    throw DegenerateFleet("fleet is empty");
  }
  double total = 0.0;
  double largest = 0.0;
  for (const auto& g : net.generators) {
    total += g.p_max;
    largest = std::max(largest, g.p_max);
  }
  if (total <= 0.0) throw DegenerateFleet("fleet has zero total capacity");
  const double alpha_r = std::min(1.0, 5.0 * largest / total);
  for (auto& g : net.generators) g.r_max = alpha_r * g.p_max;
  return net;
}

}  // namespace proxyflow

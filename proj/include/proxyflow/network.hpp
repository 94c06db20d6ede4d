#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "proxyflow/errors.hpp"

namespace proxyflow {

struct Generator {
  int id = 0;
  int bus = 0;
  double p_min = 0.0;  // MW
  double p_max = 0.0;  // MW
  double r_max = 0.0;  // MW
  double cost = 0.0;   // $/MWh, linear
  double gamma = 1.0;  // droop participation factor

  double capacity() const { return p_max - p_min; }
};

struct Line {
  int id = 0;
  int from = 0;
  int to = 0;
  double susceptance = 0.0;  // p.u.
  double f_max = 0.0;        // MW; f_min = -f_max

  double f_min() const { return -f_max; }
};

/// Static grid model. Immutable after construction; share freely across
/// threads. Line flows are oriented from->to positive.
struct Network {
  double base_mva = 100.0;
  int slack_bus = 0;
  std::vector<int> buses;
  std::vector<Generator> generators;
  std::vector<Line> lines;

  int n_buses() const { return static_cast<int>(buses.size()); }
  int n_gens() const { return static_cast<int>(generators.size()); }
  int n_lines() const { return static_cast<int>(lines.size()); }

  /// Position of a bus id in `buses`; throws ValidationError on unknown id.
  int bus_index(int bus_id) const;
  int slack_index() const { return bus_index(slack_bus); }

  /// Rebuilds the id -> position map. Called by load_network / validate;
  /// call it after constructing a Network by hand.
  void rebuild_index();

  // Fleet vectors, indexed like `generators`.
  Eigen::VectorXd gen_pmin() const;
  Eigen::VectorXd gen_pmax() const;
  Eigen::VectorXd gen_rmax() const;
  Eigen::VectorXd gen_cost() const;
  Eigen::VectorXd gen_gamma() const;

  /// lines x gens incidence of PTDF columns is built from this: bus position
  /// of each generator.
  std::vector<int> gen_bus_indices() const;

 private:
  std::unordered_map<int, int> bus_pos_;
};

/// Checks all structural invariants (single slack, connectivity, bounds,
/// attachments) and throws ValidationError listing every violation.
void validate(const Network& net);

Network load_network(const std::filesystem::path& path);
void save_network(const Network& net, const std::filesystem::path& path);

Network network_from_json_text(const std::string& text);
std::string network_to_json_text(const Network& net);

/// FNV-1a hash of the canonical JSON serialization; pins datasets and
/// checkpoints to the exact grid they were produced from.
std::string network_hash(const Network& net);

/// Per-bus MW loads keyed by bus id, stored as a separate file so the grid
/// schema stays purely structural.
Eigen::VectorXd load_bus_loads(const Network& net,
                               const std::filesystem::path& path);
void save_bus_loads(const Network& net, const Eigen::VectorXd& loads,
                    const std::filesystem::path& path);

}  // namespace proxyflow

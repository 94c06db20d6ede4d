#include "proxyflow/network.hpp"

#include <fstream>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace proxyflow {

using nlohmann::json;

int Network::bus_index(int bus_id) const {
  auto it = bus_pos_.find(bus_id);
  if (it == bus_pos_.end()) {
    throw ValidationError({"unknown bus id " + std::to_string(bus_id)});
  }
  return it->second;
}

void Network::rebuild_index() {
  bus_pos_.clear();
  for (int i = 0; i < n_buses(); ++i) bus_pos_[buses[i]] = i;
}

Eigen::VectorXd Network::gen_pmin() const {
  Eigen::VectorXd v(n_gens());
  for (int g = 0; g < n_gens(); ++g) v[g] = generators[g].p_min;
  return v;
}

Eigen::VectorXd Network::gen_pmax() const {
  Eigen::VectorXd v(n_gens());
  for (int g = 0; g < n_gens(); ++g) v[g] = generators[g].p_max;
  return v;
}

Eigen::VectorXd Network::gen_rmax() const {
  Eigen::VectorXd v(n_gens());
  for (int g = 0; g < n_gens(); ++g) v[g] = generators[g].r_max;
  return v;
}

Eigen::VectorXd Network::gen_cost() const {
  Eigen::VectorXd v(n_gens());
  for (int g = 0; g < n_gens(); ++g) v[g] = generators[g].cost;
  return v;
}

Eigen::VectorXd Network::gen_gamma() const {
  Eigen::VectorXd v(n_gens());
  for (int g = 0; g < n_gens(); ++g) v[g] = generators[g].gamma;
  return v;
}

std::vector<int> Network::gen_bus_indices() const {
  std::vector<int> idx(generators.size());
  for (size_t g = 0; g < generators.size(); ++g) {
    idx[g] = bus_index(generators[g].bus);
  }
  return idx;
}

void validate(const Network& net) {
  std::vector<std::string> bad;
  if (net.buses.empty()) bad.push_back("bus list is empty");
  if (net.base_mva <= 0.0) bad.push_back("base_mva must be positive");

  std::unordered_map<int, int> pos;
  for (int i = 0; i < net.n_buses(); ++i) {
    if (!pos.emplace(net.buses[i], i).second) {
      bad.push_back("duplicate bus id " + std::to_string(net.buses[i]));
    }
  }
  if (!pos.count(net.slack_bus)) {
    bad.push_back("slack bus " + std::to_string(net.slack_bus) +
                  " is not in the bus list");
  }

  for (const auto& g : net.generators) {
    const std::string tag = "generator " + std::to_string(g.id);
    if (!pos.count(g.bus)) {
      bad.push_back(tag + " references unknown bus " + std::to_string(g.bus));
    }
    if (!(0.0 <= g.p_min && g.p_min <= g.p_max)) {
      bad.push_back(tag + " violates 0 <= p_min <= p_max");
    }
    if (!(0.0 <= g.r_max && g.r_max <= g.p_max)) {
      bad.push_back(tag + " violates 0 <= r_max <= p_max");
    }
    if (g.gamma < 0.0) bad.push_back(tag + " has negative gamma");
  }

  for (const auto& l : net.lines) {
    const std::string tag = "line " + std::to_string(l.id);
    if (!pos.count(l.from) || !pos.count(l.to)) {
      bad.push_back(tag + " references an unknown bus");
    }
    if (l.from == l.to) bad.push_back(tag + " is a self loop");
    if (!(l.susceptance > 0.0)) bad.push_back(tag + " needs susceptance > 0");
    if (!(l.f_max > 0.0)) bad.push_back(tag + " needs f_max > 0");
  }

  // Connectivity over the line graph (only meaningful once ids are sane).
  if (bad.empty() && net.n_buses() > 1) {
    std::vector<std::vector<int>> adj(net.n_buses());
    for (const auto& l : net.lines) {
      int a = pos.at(l.from), b = pos.at(l.to);
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    std::vector<char> seen(net.n_buses(), 0);
    std::queue<int> q;
    q.push(pos.at(net.slack_bus));
    seen[pos.at(net.slack_bus)] = 1;
    int reached = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          ++reached;
          q.push(v);
        }
      }
    }
    if (reached != net.n_buses()) {
      bad.push_back("network graph is disconnected (" +
                    std::to_string(reached) + "/" +
                    std::to_string(net.n_buses()) + " buses reachable)");
    }
  }

  if (!bad.empty()) throw ValidationError(bad);
}

namespace {

double require_number(const json& j, const std::string& key,
                      const std::string& where) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ParseError(where + ": missing or non-numeric field '" + key + "'");
  }
  return j[key].get<double>();
}

int require_int(const json& j, const std::string& key,
                const std::string& where) {
  if (!j.contains(key) || !j[key].is_number_integer()) {
    throw ParseError(where + ": missing or non-integer field '" + key + "'");
  }
  return j[key].get<int>();
}

}  // namespace

Network network_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("grid file: ") + e.what());
  }
  if (!j.contains("version") || j["version"].get<int>() != 1) {
    throw ParseError("grid file: unsupported or missing schema version");
  }

  Network net;
  net.base_mva = require_number(j, "base_mva", "grid file");
  net.slack_bus = require_int(j, "slack_bus", "grid file");

  if (!j.contains("buses") || !j["buses"].is_array()) {
    throw ParseError("grid file: 'buses' must be an array");
  }
  for (const auto& b : j["buses"]) {
    net.buses.push_back(require_int(b, "id", "bus entry"));
  }

  for (const auto& g : j.value("generators", json::array())) {
    Generator gen;
    gen.id = require_int(g, "id", "generator entry");
    const std::string where = "generator " + std::to_string(gen.id);
    gen.bus = require_int(g, "bus", where);
    gen.p_min = require_number(g, "p_min", where);
    gen.p_max = require_number(g, "p_max", where);
    gen.r_max = require_number(g, "r_max", where);
    gen.cost = require_number(g, "cost", where);
    gen.gamma = require_number(g, "gamma", where);
    net.generators.push_back(gen);
  }

  for (const auto& l : j.value("lines", json::array())) {
    Line line;
    line.id = require_int(l, "id", "line entry");
    const std::string where = "line " + std::to_string(line.id);
    line.from = require_int(l, "from", where);
    line.to = require_int(l, "to", where);
    line.susceptance = require_number(l, "susceptance", where);
    line.f_max = require_number(l, "f_max", where);
    net.lines.push_back(line);
  }

  net.rebuild_index();
  validate(net);
  return net;
}

std::string network_to_json_text(const Network& net) {
  json j;
  j["version"] = 1;
  j["base_mva"] = net.base_mva;
  j["slack_bus"] = net.slack_bus;
  j["buses"] = json::array();
  for (int b : net.buses) j["buses"].push_back({{"id", b}});
  j["generators"] = json::array();
  for (const auto& g : net.generators) {
    j["generators"].push_back({{"id", g.id},
                               {"bus", g.bus},
                               {"p_min", g.p_min},
                               {"p_max", g.p_max},
                               {"r_max", g.r_max},
                               {"cost", g.cost},
                               {"gamma", g.gamma}});
  }
  j["lines"] = json::array();
  for (const auto& l : net.lines) {
    j["lines"].push_back({{"id", l.id},
                          {"from", l.from},
                          {"to", l.to},
                          {"susceptance", l.susceptance},
                          {"f_max", l.f_max}});
  }
  return j.dump(2) + "\n";
}

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open grid file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return network_from_json_text(ss.str());
}

void save_network(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write grid file " + path.string());
  out << network_to_json_text(net);
}

std::string network_hash(const Network& net) {
  const std::string text = network_to_json_text(net);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

Eigen::VectorXd load_bus_loads(const Network& net,
                               const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open loads file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("loads file: ") + e.what());
  }
  if (!j.contains("loads") || !j["loads"].is_object()) {
    throw ParseError("loads file: expected top-level object field 'loads'");
  }
  Eigen::VectorXd d = Eigen::VectorXd::Zero(net.n_buses());
  for (const auto& [key, val] : j["loads"].items()) {
    int bus_id = 0;
    try {
      bus_id = std::stoi(key);
    } catch (...) {
      throw ParseError("loads file: non-integer bus id '" + key + "'");
    }
    if (!val.is_number()) {
      throw ParseError("loads file: load at bus " + key + " is not a number");
    }
    const double mw = val.get<double>();
    if (mw < 0.0) throw ValidationError({"negative load at bus " + key});
    d[net.bus_index(bus_id)] = mw;
  }
  return d;
}

void save_bus_loads(const Network& net, const Eigen::VectorXd& loads,
                    const std::filesystem::path& path) {
  if (loads.size() != net.n_buses()) {
    throw ShapeMismatch("loads vector size does not match bus count");
  }
  json j;
  j["loads"] = json::object();
  for (int i = 0; i < net.n_buses(); ++i) {
    if (loads[i] != 0.0) j["loads"][std::to_string(net.buses[i])] = loads[i];
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write loads file " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace proxyflow

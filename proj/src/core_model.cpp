#include "gesha/core_model.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "gesha/errors.hpp"

namespace gesha {

int ElectricNetwork::incidence(int line, int bus) const {
  const auto& l = lines.at(static_cast<std::size_t>(line));
  if (l.from == bus) return 1;
  if (l.to == bus) return -1;
  return 0;
}

double ElectricNetwork::total_capacity() const {
  double total = 0.0;
  for (const auto& g : generators) total += g.pmax;
  return total;
}

double GasNetwork::total_supply_capacity() const {
  double total = 0.0;
  for (const auto& s : supplies) total += s.smax;
  return total;
}

PipeConstants pipe_constants(double length, double diameter, double friction, double sound_speed) {
  if (!(length > 0.0) || !(diameter > 0.0) || !(sound_speed > 0.0) || friction < 0.0) {
    throw DataError("pipe constants need positive length, diameter and sound speed");
  }
  const double area = std::numbers::pi * diameter * diameter / 4.0;
  const double a2 = sound_speed * sound_speed;
  return {a2 / area, area, friction * a2 / (2.0 * diameter * area)};
}

double DiscretizedGasNetwork::demand(int node, int t) const {
  if (node >= num_original_nodes) return 0.0;
  const auto& row = base.demand[static_cast<std::size_t>(node)];
  return row.empty() ? 0.0 : row[static_cast<std::size_t>(t)];
}

DiscretizedGasNetwork discretize_gas_network(const GasNetwork& net, double max_segment_length) {
  if (!(max_segment_length > 0.0)) {
    throw ConfigError("maximum segment length must be positive");
  }
  DiscretizedGasNetwork d;
  d.base = net;
  d.num_original_nodes = static_cast<int>(net.nodes.size());
  for (const auto& n : net.nodes) {
    d.node_names.push_back(n.name);
    d.pmin.push_back(n.pmin);
    d.pmax.push_back(n.pmax);
  }
  for (std::size_t p = 0; p < net.pipes.size(); ++p) {
    const auto& pipe = net.pipes[p];
    if (!(pipe.length > 0.0) || !(pipe.diameter > 0.0)) {
      throw DataError("pipe " + pipe.name + " has non-positive length or diameter");
    }
    if (pipe.from < 0 || pipe.to < 0 || pipe.from >= d.num_original_nodes ||
        pipe.to >= d.num_original_nodes) {
      throw DataError("pipe " + pipe.name + " references an unknown node");
    }
    // Relative slack so exact multiples do not round up.
    const int k = std::max(1, static_cast<int>(std::ceil(pipe.length / max_segment_length - 1e-9)));
    const double dx = pipe.length / k;
    const auto constants = pipe_constants(dx, pipe.diameter, pipe.friction, net.sound_speed);
    std::vector<int> chain;
    int prev = pipe.from;
    for (int s = 0; s < k; ++s) {
      int next = pipe.to;
      if (s + 1 < k) {
        next = d.num_nodes();
        const double w = static_cast<double>(s + 1) / k;
        d.node_names.push_back(pipe.name + "#" + std::to_string(s + 1));
        d.pmin.push_back((1.0 - w) * net.nodes[pipe.from].pmin + w * net.nodes[pipe.to].pmin);
        d.pmax.push_back((1.0 - w) * net.nodes[pipe.from].pmax + w * net.nodes[pipe.to].pmax);
      }
      chain.push_back(static_cast<int>(d.subpipes.size()));
      d.subpipes.push_back({static_cast<int>(p), prev, next, dx, pipe.diameter, constants});
      prev = next;
    }
    d.pipe_chain.push_back(std::move(chain));
  }
  const auto nn = static_cast<std::size_t>(d.num_nodes());
  d.subpipe_inlets.assign(nn, {});
  d.subpipe_outlets.assign(nn, {});
  d.compressors_from.assign(nn, {});
  d.compressors_to.assign(nn, {});
  d.supplies_at.assign(nn, {});
  for (std::size_t s = 0; s < d.subpipes.size(); ++s) {
    d.subpipe_inlets[d.subpipes[s].from].push_back(static_cast<int>(s));
    d.subpipe_outlets[d.subpipes[s].to].push_back(static_cast<int>(s));
  }
  for (std::size_t c = 0; c < net.compressors.size(); ++c) {
    d.compressors_from.at(net.compressors[c].from).push_back(static_cast<int>(c));
    d.compressors_to.at(net.compressors[c].to).push_back(static_cast<int>(c));
  }
  for (std::size_t s = 0; s < net.supplies.size(); ++s) {
    d.supplies_at.at(net.supplies[s].node).push_back(static_cast<int>(s));
  }
  return d;
}

std::vector<int> CouplingMap::by_generator(int num_generators) const {
  std::vector<int> map(static_cast<std::size_t>(num_generators), -1);
  for (std::size_t k = 0; k < gfpps.size(); ++k) {
    const int g = gfpps[k].generator;
    if (g >= 0 && g < num_generators) map[g] = static_cast<int>(k);
  }
  return map;
}

void Instance::finalize() {
  const auto buses = static_cast<std::size_t>(electric.num_buses());
  const auto steps = static_cast<std::size_t>(time.steps);
  if (electric.load_add_cap.empty()) {
    electric.load_add_cap.assign(buses, std::vector<double>(steps, electric.total_capacity()));
  }
  if (!gas.empty() && gas.demand.empty()) {
    gas.demand.assign(gas.nodes.size(), std::vector<double>(steps, 0.0));
  }
  if (!gas.empty()) {
    discretized = discretize_gas_network(gas, max_segment_length);
  } else {
    discretized = DiscretizedGasNetwork{};
  }
}

namespace {

int find_root(std::vector<int>& parent, int v) {
  while (parent[v] != v) v = parent[v] = parent[parent[v]];
  return v;
}

bool connected(int n, const std::vector<std::pair<int, int>>& edges) {
  if (n <= 1) return true;
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) continue;
    parent[find_root(parent, a)] = find_root(parent, b);
  }
  const int root = find_root(parent, 0);
  for (int v = 1; v < n; ++v) {
    if (find_root(parent, v) != root) return false;
  }
  return true;
}

bool shape_ok(const std::vector<std::vector<double>>& m, std::size_t rows, std::size_t cols) {
  if (m.size() != rows) return false;
  for (const auto& r : m) {
    if (r.size() != cols) return false;
  }
  return true;
}

}  // namespace

std::vector<Violation> validate(const Instance& inst) {
  std::vector<Violation> out;
  auto add = [&](std::string element, std::string rule) {
    out.push_back({std::move(element), std::move(rule)});
  };
  const auto& e = inst.electric;
  const int nb = e.num_buses();
  const int steps = inst.time.steps;

  if (steps < 2) add("time", "horizon must have at least 2 steps");
  if (!(inst.time.dt > 0.0)) add("time", "step length must be positive");
  if (nb == 0) add("electric", "no buses");
  if (e.reference_bus < 0 || e.reference_bus >= nb) add("electric", "reference bus out of range");
  if (!(e.base_mva > 0.0)) add("electric", "base_mva must be positive");

  std::vector<std::pair<int, int>> edges;
  for (const auto& l : e.lines) {
    if (l.from < 0 || l.from >= nb || l.to < 0 || l.to >= nb) {
      add("line " + l.name, "endpoint bus out of range");
    } else if (l.from == l.to) {
      add("line " + l.name, "incidence row needs one +1 and one -1 (self loop)");
    }
    if (!(l.susceptance > 0.0)) add("line " + l.name, "susceptance must be positive");
    if (l.limit < 0.0) add("line " + l.name, "thermal limit must be non-negative");
    edges.emplace_back(l.from, l.to);
  }
  if (nb > 0 && !connected(nb, edges)) add("electric", "bus graph is not connected");

  for (const auto& g : e.generators) {
    const std::string el = "generator " + g.name;
    if (g.bus < 0 || g.bus >= nb) add(el, "bus out of range");
    if (g.pmin > g.pmax) add(el, "pmin exceeds pmax");
    if (g.ramp < 0.0) add(el, "ramp limit must be non-negative");
    if (!(g.cost_down <= g.cost && g.cost <= g.cost_up)) add(el, "costs must satisfy C- <= C <= C+");
  }
  for (const auto& w : e.wind_farms) {
    if (w.bus < 0 || w.bus >= nb) add("wind " + w.name, "bus out of range");
    if (w.capacity < 0.0) add("wind " + w.name, "capacity must be non-negative");
  }
  if (!shape_ok(e.load, static_cast<std::size_t>(nb), static_cast<std::size_t>(steps))) {
    add("electric", "load must be buses x steps");
  }
  if (!e.load_add_cap.empty() &&
      !shape_ok(e.load_add_cap, static_cast<std::size_t>(nb), static_cast<std::size_t>(steps))) {
    add("electric", "load_add_cap must be buses x steps");
  }

  const auto& gas = inst.gas;
  const int nn = static_cast<int>(gas.nodes.size());
  if (nn > 0) {
    for (const auto& n : gas.nodes) {
      if (n.pmin > n.pmax) add("gas node " + n.name, "pmin exceeds pmax");
      if (n.pmin <= 0.0) add("gas node " + n.name, "pressure bounds must be positive");
    }
    if (gas.slack_node < 0 || gas.slack_node >= nn) {
      add("gas", "slack node out of range");
    } else {
      const auto& s = gas.nodes[gas.slack_node];
      if (gas.slack_pressure < s.pmin || gas.slack_pressure > s.pmax) {
        add("gas node " + s.name, "reference pressure outside bounds");
      }
    }
    if (!(gas.sound_speed > 0.0)) add("gas", "sound speed must be positive");
    std::vector<std::pair<int, int>> gedges;
    for (const auto& p : gas.pipes) {
      const std::string el = "pipe " + p.name;
      if (p.from < 0 || p.from >= nn || p.to < 0 || p.to >= nn || p.from == p.to) {
        add(el, "invalid endpoints");
      }
      if (!(p.length > 0.0) || !(p.diameter > 0.0)) add(el, "non-positive length or diameter");
      if (p.friction < 0.0) add(el, "negative friction factor");
      gedges.emplace_back(p.from, p.to);
    }
    for (const auto& c : gas.compressors) {
      const std::string el = "compressor " + c.name;
      if (c.from < 0 || c.from >= nn || c.to < 0 || c.to >= nn || c.from == c.to) {
        add(el, "invalid endpoints");
      }
      if (!(c.ratio_min > 0.0) || c.ratio_min > c.ratio_max) add(el, "ratio bounds invalid");
      if (!std::isnan(c.flow_min) && !std::isnan(c.flow_max) && c.flow_min > c.flow_max) {
        add(el, "flow bounds invalid");
      }
      gedges.emplace_back(c.from, c.to);
    }
    if (!connected(nn, gedges)) add("gas", "pipe and compressor graph is not connected");
    for (const auto& s : gas.supplies) {
      if (s.node < 0 || s.node >= nn) add("supply " + s.name, "node out of range");
      if (s.smin > s.smax) add("supply " + s.name, "smin exceeds smax");
    }
    if (!shape_ok(gas.demand, static_cast<std::size_t>(nn), static_cast<std::size_t>(steps))) {
      add("gas", "demand must be nodes x steps");
    }
  }

  std::vector<int> seen(e.generators.size(), 0);
  for (const auto& link : inst.coupling.gfpps) {
    const bool gen_ok = link.generator >= 0 && link.generator < static_cast<int>(e.generators.size());
    const std::string el = gen_ok ? "gfpp " + e.generators[link.generator].name
                                  : "gfpp #" + std::to_string(link.generator);
    if (!gen_ok) {
      add(el, "generator does not exist");
    } else if (++seen[link.generator] > 1) {
      add(el, "generator mapped to more than one gas node");
    }
    if (link.gas_node < 0 || link.gas_node >= nn) add(el, "gas node does not exist");
    if (!(link.heat_rate > 0.0)) add(el, "heat rate must be positive");
  }
  if (!(inst.max_segment_length > 0.0)) add("gas", "max segment length must be positive");
  return out;
}

Instance apply_cost_stress(const Instance& instance, const CostStress& stress) {
  if (!(stress.gas > 0.0) || !(stress.non_gas > 0.0)) {
    throw ConfigError("cost multipliers must be positive");
  }
  Instance out = instance;
  const auto gfpp = out.coupling.by_generator(out.num_generators());
  for (std::size_t g = 0; g < out.electric.generators.size(); ++g) {
    auto& gen = out.electric.generators[g];
    const double f = gfpp[g] >= 0 ? stress.gas : stress.non_gas;
    gen.cost *= f;
    gen.cost_up *= f;
    gen.cost_down *= f;
  }
  for (auto& s : out.gas.supplies) s.cost *= stress.gas;
  out.finalize();
  return out;
}

Instance truncate_horizon(const Instance& instance, int steps) {
  if (steps < 2 || steps > instance.time.steps) {
    throw ConfigError("horizon override must be between 2 and " + std::to_string(instance.time.steps));
  }
  Instance out = instance;
  out.time.steps = steps;
  auto cut = [steps](std::vector<std::vector<double>>& m) {
    for (auto& r : m) {
      if (static_cast<int>(r.size()) > steps) r.resize(static_cast<std::size_t>(steps));
    }
  };
  cut(out.electric.load);
  cut(out.electric.load_add_cap);
  cut(out.gas.demand);
  out.finalize();
  return out;
}

Instance without_gas(const Instance& instance) {
  Instance out = instance;
  out.gas = GasNetwork{};
  out.coupling = CouplingMap{};
  out.finalize();
  return out;
}

}  // namespace gesha

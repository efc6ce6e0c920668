#pragma once

// Small instances shared by the unit tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "gesha/core_model.hpp"
#include "gesha/instance_io.hpp"
#include "gesha/scenarios.hpp"

namespace fixture {

inline std::string data_path(const std::string& rel) { return std::string(GESHA_DATA_DIR) + "/" + rel; }

inline gesha::Instance micro() { return gesha::load_instance(data_path("micro/instance.json")); }
inline gesha::Instance desk() { return gesha::load_instance(data_path("desk/instance.json")); }
inline gesha::ScenarioSet micro_scenarios(double split = 0.8, int steps = -1) {
  return gesha::load_scenarios(data_path("micro/scenarios.csv"), split, 1, steps);
}
inline gesha::ScenarioSet desk_scenarios(double split = 0.8, int steps = -1) {
  return gesha::load_scenarios(data_path("desk/scenarios.csv"), split, 1, steps);
}

inline gesha::Generator generator(std::string name, int bus, double pmin, double pmax, double ramp,
                                  double cost, double up, double down) {
  gesha::Generator g;
  g.name = std::move(name);
  g.bus = bus;
  g.pmin = pmin;
  g.pmax = pmax;
  g.ramp = ramp;
  g.cost = cost;
  g.cost_up = up;
  g.cost_down = down;
  return g;
}

// One bus, no lines, no gas; constant load.
inline gesha::Instance single_bus(int steps, double load, std::vector<gesha::Generator> gens,
                                  double wind_capacity = 0.0) {
  gesha::Instance inst;
  inst.name = "single";
  inst.time.steps = steps;
  inst.electric.buses = {"b1"};
  inst.electric.load = {std::vector<double>(static_cast<std::size_t>(steps), load)};
  inst.electric.generators = std::move(gens);
  if (wind_capacity > 0.0) inst.electric.wind_farms.push_back({"w1", 0, wind_capacity});
  inst.finalize();
  return inst;
}

inline gesha::Scenario flat_scenario(std::string name, int steps, double factor) {
  return {std::move(name), {std::vector<double>(static_cast<std::size_t>(steps), factor)}};
}

// Two-bus gas-free system with a congested line and wind at the cheap bus.
inline gesha::Instance two_bus(int steps) {
  gesha::Instance inst;
  inst.name = "two-bus";
  inst.time.steps = steps;
  inst.electric.buses = {"a", "b"};
  inst.electric.lines.push_back({"ab", 0, 1, 10.0, 40.0});
  std::vector<double> la, lb;
  for (int t = 0; t < steps; ++t) {
    la.push_back(30.0 + 5.0 * t);
    lb.push_back(50.0 + 4.0 * (t % 3));
  }
  inst.electric.load = {la, lb};
  inst.electric.generators = {generator("cheap", 0, 10.0, 120.0, 25.0, 20.0, 21.0, 18.8),
                              generator("peak", 1, 0.0, 80.0, 40.0, 45.0, 47.25, 42.3)};
  inst.electric.wind_farms.push_back({"w", 0, 40.0});
  inst.finalize();
  return inst;
}

// Gas line n0 - n1 - ... with the slack and the only supply at n0, a constant
// withdrawal at the last node and one idle generator bus. `compressor_at`
// >= 0 replaces that pipe by a compressor.
inline gesha::Instance gas_line(std::vector<double> lengths, double demand, int steps = 4,
                                int compressor_at = -1, double compressor_cost = 0.0) {
  gesha::Instance inst;
  inst.name = "gas-line";
  inst.time.steps = steps;
  inst.electric.buses = {"b"};
  inst.electric.load = {std::vector<double>(static_cast<std::size_t>(steps), 0.0)};
  auto& gas = inst.gas;
  for (std::size_t i = 0; i <= lengths.size(); ++i) gas.nodes.push_back({"n" + std::to_string(i), 3e6, 7e6});
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const int a = static_cast<int>(i);
    if (static_cast<int>(i) == compressor_at) {
      gesha::Compressor c;
      c.name = "c" + std::to_string(i);
      c.from = a;
      c.to = a + 1;
      c.ratio_min = 1.0;
      c.ratio_max = 1.4;
      c.cost = compressor_cost;
      gas.compressors.push_back(c);
    } else {
      gas.pipes.push_back({"p" + std::to_string(i), a, a + 1, lengths[i], 0.5, 0.012});
    }
  }
  gas.supplies.push_back({"s0", 0, 0.0, 200.0, 0.2});
  gas.demand.assign(gas.nodes.size(), std::vector<double>(static_cast<std::size_t>(steps), 0.0));
  gas.demand.back().assign(static_cast<std::size_t>(steps), demand);
  gas.slack_node = 0;
  gas.slack_pressure = 6e6;
  gas.sound_speed = 350.0;
  inst.max_segment_length = 20000.0;
  inst.finalize();
  return inst;
}

// phi(m) = m sqrt(m^2 + eps).
inline double phi(double m, double eps) { return m * std::sqrt(m * m + eps); }

// Steady outlet pressure of a subpipe carrying m from inlet pressure p_in:
// p_out - p_in + k phi(m) / ((p_in + p_out) / 2) = 0, by bisection.
inline double steady_outlet_pressure(double p_in, double m, double k, double eps) {
  double lo = 1.0;
  double hi = p_in;
  auto f = [&](double p) { return p - p_in + k * phi(m, eps) / (0.5 * (p_in + p)); };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// Uniform random dispatch inside X: bounds plus ramp limits, built forward in time.
inline std::vector<double> random_dispatch(const gesha::Instance& inst, std::mt19937_64& rng) {
  std::vector<double> x(static_cast<std::size_t>(inst.num_x()));
  for (int g = 0; g < inst.num_generators(); ++g) {
    const auto& gen = inst.electric.generators[g];
    double prev = 0.0;
    for (int t = 0; t < inst.num_steps(); ++t) {
      double lo = gen.pmin, hi = gen.pmax;
      if (t > 0) {
        lo = std::max(lo, prev - gen.ramp);
        hi = std::min(hi, prev + gen.ramp);
      }
      prev = std::uniform_real_distribution<double>(lo, hi)(rng);
      x[inst.x_index(g, t)] = prev;
    }
  }
  return x;
}

}  // namespace fixture

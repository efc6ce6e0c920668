#pragma once

// Network data for the coupled gas-electric instance.
//
// Units: SI inside the gas model (Pa, kg/s, m, s); MW and MWh on the electric
// side; costs in the instance currency per MWh (electric) or per kg (gas).
// Heat rates are stored as kg/MWh as in the input files.

#include <limits>
#include <string>
#include <vector>

namespace gesha {

struct Line {
  std::string name;
  int from = 0;
  int to = 0;
  double susceptance = 0.0;  // p.u. on the network base
  double limit = 0.0;        // MW
};

struct Generator {
  std::string name;
  int bus = 0;
  double pmin = 0.0;
  double pmax = 0.0;
  double ramp = 0.0;  // MW per step
  double cost = 0.0;  // C_g
  double cost_up = 0.0;
  double cost_down = 0.0;
};

struct WindFarm {
  std::string name;
  int bus = 0;
  double capacity = 0.0;
};

struct ElectricNetwork {
  std::vector<std::string> buses;
  std::vector<Line> lines;
  std::vector<Generator> generators;
  std::vector<WindFarm> wind_farms;
  std::vector<std::vector<double>> load;  // [bus][t], MW
  int reference_bus = 0;
  double base_mva = 100.0;
  double voll = 1000.0;
  double cost_add = 1000.0;
  // [bus][t]; filled with the system generation capacity when not given.
  std::vector<std::vector<double>> load_add_cap;

  [[nodiscard]] int num_buses() const { return static_cast<int>(buses.size()); }
  // A(l,b): +1 at the sending bus, -1 at the receiving bus.
  [[nodiscard]] int incidence(int line, int bus) const;
  [[nodiscard]] double total_capacity() const;
};

struct GasNode {
  std::string name;
  double pmin = 0.0;  // Pa
  double pmax = 0.0;
};

struct Pipe {
  std::string name;
  int from = 0;
  int to = 0;
  double length = 0.0;    // m
  double diameter = 0.0;  // m
  double friction = 0.0;
};

struct Compressor {
  std::string name;
  int from = 0;
  int to = 0;
  double ratio_min = 1.0;
  double ratio_max = 1.0;
  double cost = 0.0;  // per unit ratio per step
  // Flow limits; NaN means "use +-(total supply capacity)".
  double flow_min = std::numeric_limits<double>::quiet_NaN();
  double flow_max = std::numeric_limits<double>::quiet_NaN();
};

struct Supply {
  std::string name;
  int node = 0;
  double smin = 0.0;  // kg/s
  double smax = 0.0;
  double cost = 0.0;  // per kg
};

struct GasNetwork {
  std::vector<GasNode> nodes;
  std::vector<Pipe> pipes;
  std::vector<Compressor> compressors;
  std::vector<Supply> supplies;
  std::vector<std::vector<double>> demand;  // [node][t], kg/s
  double shed_cost = 5.0;                   // per kg
  int slack_node = 0;
  double slack_pressure = 0.0;  // Pa
  double sound_speed = 350.0;   // m/s, isothermal

  [[nodiscard]] bool empty() const { return nodes.empty(); }
  [[nodiscard]] double total_supply_capacity() const;
};

struct PipeConstants {
  double vm = 0.0;
  double vp = 0.0;
  double vf = 0.0;
};

// Isothermal Euler convention: V_m = a^2/A, V_p = A, V_f = f a^2 / (2 D A).
PipeConstants pipe_constants(double length, double diameter, double friction, double sound_speed);

struct Subpipe {
  int pipe = 0;  // original pipe
  int from = 0;  // node indices in the discretized network
  int to = 0;
  double dx = 0.0;
  double diameter = 0.0;
  PipeConstants constants;
};

struct DiscretizedGasNetwork {
  GasNetwork base;
  // Original nodes keep their indices; auxiliary nodes follow.
  std::vector<std::string> node_names;
  std::vector<double> pmin;
  std::vector<double> pmax;
  int num_original_nodes = 0;
  std::vector<Subpipe> subpipes;
  std::vector<std::vector<int>> pipe_chain;  // original pipe -> subpipe ids, inlet first
  // Node incidence: subpipes whose inlet / outlet is at the node, compressors
  // leaving / entering it, supplies located at it.
  std::vector<std::vector<int>> subpipe_inlets;
  std::vector<std::vector<int>> subpipe_outlets;
  std::vector<std::vector<int>> compressors_from;
  std::vector<std::vector<int>> compressors_to;
  std::vector<std::vector<int>> supplies_at;

  [[nodiscard]] int num_nodes() const { return static_cast<int>(node_names.size()); }
  [[nodiscard]] int num_auxiliary() const { return num_nodes() - num_original_nodes; }
  [[nodiscard]] double demand(int node, int t) const;
};

DiscretizedGasNetwork discretize_gas_network(const GasNetwork& net, double max_segment_length);

struct GfppLink {
  int generator = 0;
  int gas_node = 0;
  double heat_rate = 0.0;  // kg/MWh
};

struct CouplingMap {
  std::vector<GfppLink> gfpps;
  // Index into gfpps for each generator, -1 if not gas fired.
  [[nodiscard]] std::vector<int> by_generator(int num_generators) const;
};

struct TimeGrid {
  int steps = 0;
  double dt = 3600.0;  // s

  [[nodiscard]] double hours() const { return dt / 3600.0; }
  // u_t: 0 at the first step (steady state), 1 afterwards.
  [[nodiscard]] double steady_flag(int t) const { return t == 0 ? 0.0 : 1.0; }
};

struct Instance {
  std::string name;
  std::string currency = "USD";
  ElectricNetwork electric;
  GasNetwork gas;
  CouplingMap coupling;
  TimeGrid time;
  double max_segment_length = 10000.0;
  DiscretizedGasNetwork discretized;  // rebuilt by finalize()

  // Fills defaults (load-add caps) and rebuilds the discretized network.
  void finalize();
  [[nodiscard]] int num_generators() const {
    return static_cast<int>(electric.generators.size());
  }
  [[nodiscard]] int num_steps() const { return time.steps; }
  // Size of the first-stage decision vector.
  [[nodiscard]] int num_x() const { return num_generators() * num_steps(); }
  // Stable flattening of x_{g,t}.
  [[nodiscard]] int x_index(int g, int t) const { return g * num_steps() + t; }
  [[nodiscard]] bool has_gas() const { return !gas.empty(); }
};

struct Violation {
  std::string element;
  std::string rule;
};

std::vector<Violation> validate(const Instance& instance);

// Cost multipliers for the stress configuration: gas supply and GFPP costs
// scale by `gas`, the other generators by `non_gas`.
struct CostStress {
  double gas = 1.0;
  double non_gas = 1.0;
};

Instance apply_cost_stress(const Instance& instance, const CostStress& stress);
// Instance restricted to the first `steps` time steps.
Instance truncate_horizon(const Instance& instance, int steps);
// Same instance without the gas network and coupling.
Instance without_gas(const Instance& instance);

}  // namespace gesha

#pragma once

// Assembly of the first-stage problem and of the second-stage electric, gas
// and coupling blocks as ConstraintSystems.
//
// Index grids below hold column (or row) numbers of the system the block was
// built into, laid out as [element * T + t].

#include <span>
#include <vector>

#include "gesha/constraint_system.hpp"
#include "gesha/core_model.hpp"
#include "gesha/scenarios.hpp"

namespace gesha {

using Grid = std::vector<std::vector<double>>;

// x over (g, t) with Instance::x_index; bounds on p_{g,t}, ramp rows for
// t >= 2, objective sum C_g p_{g,t} dt.
ConstraintSystem build_first_stage(const Instance& instance);
double first_stage_cost(const Instance& instance, std::span<const double> x);
// True if x respects the generator bounds and ramp limits (to `tol` MW).
bool first_stage_feasible(const Instance& instance, std::span<const double> x, double tol = 1e-6);

struct ElectricIndex {
  std::vector<int> p, p_up, p_down;  // g
  std::vector<int> spill;            // wind farm
  std::vector<int> shed, add, theta;  // bus
  std::vector<int> flow;              // line
  std::vector<int> fix_rows;          // g, row p_{g,t} = x_{g,t}
  std::vector<int> balance_rows;      // bus
};

// Adds the electric recourse for decision x and wind output W[j][t]. Fix rows
// are registered as FixLinks with the system.
ElectricIndex build_second_stage_electric(ConstraintSystem& system, const Instance& instance,
                                          std::span<const double> x, const Grid& wind);

struct GasIndex {
  std::vector<int> m_in, m_out, m_avg, pi_avg;  // subpipe
  std::vector<int> pi, shed;                    // node (discretized)
  std::vector<int> kappa, mc;                   // compressor
  std::vector<int> supply;                      // supply
  std::vector<int> gfpp_demand;                 // gfpp link
  std::vector<int> balance_rows;                // node
  std::vector<int> continuity_rows, momentum_rows;  // subpipe
  std::vector<int> compressor_rows;                 // compressor
  int linepack_row = -1;
};

struct GasOptions {
  // phi(m) = m sqrt(m^2 + eps M0^2), M0 the flow scale of the instance.
  double smoothing = 1e-6;
  // When set, GFPP demands [k][t] (kg/s) are fixed instead of free.
  const Grid* fixed_gfpp_demand = nullptr;
};

GasIndex build_second_stage_gas(ConstraintSystem& system, const Instance& instance,
                                const GasOptions& options = {});

// d_{g,t} = eta_g (p + p+ - p-) rows and the fuel double-count correction on d.
std::vector<int> build_coupling(ConstraintSystem& system, const Instance& instance,
                                const ElectricIndex& electric, const GasIndex& gas);

struct SecondStageLayout {
  bool has_gas = false;
  ElectricIndex electric;
  GasIndex gas;
  std::vector<int> coupling_rows;
};

struct SecondStage {
  ConstraintSystem system;
  SecondStageLayout layout;
};

struct SecondStageOptions {
  bool include_gas = true;
  double smoothing = 1e-6;
};

// Full recourse problem g(x, omega).
SecondStage build_second_stage(const Instance& instance, std::span<const double> x,
                               const Scenario& scenario, const SecondStageOptions& options = {});

struct StageCounts {
  int variables = 0;
  int rows = 0;
};
StageCounts first_stage_counts(const Instance& instance);
StageCounts second_stage_counts(const Instance& instance, bool include_gas);

// Characteristic magnitudes used for variable scale hints and residual
// normalization.
double gas_flow_scale(const Instance& instance);
double gas_pressure_scale(const Instance& instance);
// Heat rate in kg/s per MW.
inline double heat_rate_si(double kg_per_mwh) { return kg_per_mwh / 3600.0; }

struct RecourseSolution {
  // Electric, [element][t]; MW.
  Grid p, p_up, p_down, spill, shed, add, flow, theta;
  // Gas, [element][t]; kg/s, Pa, ratio.
  Grid supply, kappa, m_in, m_out, m_avg, pi_avg, pi, gfpp_demand, gas_shed, mc;
  double h_elec = 0.0;
  double h_gas = 0.0;
  // Subtracted fuel cost term; total = h_elec + h_gas - correction.
  double correction = 0.0;
  [[nodiscard]] double total() const { return h_elec + h_gas - correction; }
};

// `z` starts at the block's first column.
RecourseSolution extract_recourse(const Instance& instance, const SecondStageLayout& layout,
                                  std::span<const double> z);

}  // namespace gesha

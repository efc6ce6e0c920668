#pragma once

// A-posteriori quality V(x) = f(x) + mean_omega g(x, omega) with mitigation
// statistics and a cost breakdown.

#include <span>
#include <string>
#include <vector>

#include "gesha/core_model.hpp"
#include "gesha/scenarios.hpp"
#include "gesha/subproblem.hpp"

namespace gesha {

struct ScenarioOutcome {
  std::string name;
  bool failed = false;  // solve threw; excluded from all means
  bool converged = false;
  std::string message;
  double g = 0.0;
  double h_elec = 0.0;
  double h_gas_net = 0.0;  // h_gas minus the GFPP fuel correction
  int slp_iterations = 0;
  double max_residual = 0.0;
  // Energy totals over the horizon (MWh, kg).
  double wind_available = 0.0, wind_spill = 0.0;
  double load = 0.0, load_shed = 0.0;
  double gas_demand = 0.0, gas_shed = 0.0;
  double gfpp_energy = 0.0;  // MWh delivered by GFPPs after redispatch

  [[nodiscard]] double spill_percent() const;
  [[nodiscard]] double load_shed_percent() const;
  [[nodiscard]] double gas_shed_percent() const;
};

struct Summary {
  double mean = 0.0, max = 0.0, min = 0.0;
};

struct EvaluationReport {
  std::string label;
  std::string currency;
  bool out_of_sample = false;
  double value = 0.0;  // V(x)
  double first_stage_cost = 0.0;
  std::vector<ScenarioOutcome> scenarios;  // evaluation order
  int failed = 0;
  int not_converged = 0;
  Summary wind_spill_pct, load_shed_pct, gas_shed_pct;
  Summary g, second_stage_elec, second_stage_gas;
  double first_stage_gfpp_energy = 0.0;  // MWh scheduled on GFPPs
};

struct EvaluateOptions {
  SubproblemConfig subproblem;
  int workers = 1;
  std::string label;
  bool out_of_sample = false;
};

// Scenarios are solved independently from steady-state starts, so the report
// does not depend on order or parallelism. Throws DataError when x has the
// wrong dimension.
EvaluationReport evaluate(const Instance& instance, std::span<const double> x,
                          const std::vector<Scenario>& scenarios,
                          const EvaluateOptions& options = {});

struct Candidate {
  std::string label;
  std::vector<double> x;
};

std::vector<EvaluationReport> compare(const Instance& instance,
                                      const std::vector<Candidate>& candidates,
                                      const std::vector<Scenario>& scenarios,
                                      const EvaluateOptions& options = {});

// Summary of a list of values (zeros when empty).
Summary summarize(const std::vector<double>& values);

}  // namespace gesha

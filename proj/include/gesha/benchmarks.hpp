#pragma once

// Reference methods: the coupled sample-average problem solved in one piece,
// multi-cut Benders decomposition, and the gas-blind OPF dispatch.

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gesha/core_model.hpp"
#include "gesha/scenarios.hpp"
#include "gesha/subproblem.hpp"

namespace gesha {

struct OneShotResult {
  std::vector<double> x;
  double objective = 0.0;  // f(x) + mean g at the SLP solution
  bool converged = false;
  int slp_iterations = 0;
  double max_residual = 0.0;
  double wall = 0.0;
  std::string message;
};

// Every scenario embedded with weight 1/|scenarios|.
OneShotResult solve_one_shot(const Instance& instance, const std::vector<Scenario>& scenarios,
                             const SubproblemConfig& config = {});

// One-shot on the electric network alone (gas block and coupling dropped).
OneShotResult solve_opf_only(const Instance& instance, const std::vector<Scenario>& scenarios,
                             const SubproblemConfig& config = {});

struct BendersConfig {
  // Relative gap between the bounds.
  double epsilon = 0.01;
  // Stop early when both bounds move by less than this (relative) between
  // consecutive iterations.
  double stall_tolerance = 1e-4;
  int max_iterations = 200;
  double time_limit = std::numeric_limits<double>::infinity();
  int workers = 1;
  SubproblemConfig subproblem;
  void validate() const;
};

// eta_omega >= value + gradient . (x - point)
struct BendersCut {
  int scenario = 0;  // position in the scenario list
  int iteration = 0;
  double value = 0.0;
  std::vector<double> gradient;
  std::vector<double> point;

  [[nodiscard]] double evaluate(std::span<const double> x) const;
};

struct BendersRecord {
  int iteration = 0;
  double lower = 0.0;
  double upper = 0.0;  // f + mean g at this iteration's x
  double wall = 0.0;
};

struct BendersResult {
  std::vector<double> x;  // incumbent: lowest upper bound seen
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  std::vector<BendersRecord> history;
  std::vector<BendersCut> cuts;
  std::string stop_reason;  // "gap", "stalled", "iteration_limit", "time_limit"
  int iterations = 0;
  int failed_solves = 0;

  [[nodiscard]] double gap() const;
};

// On gas-coupled instances the cuts are not guaranteed valid, so the bounds
// are heuristic there.
BendersResult run_benders(const Instance& instance, const std::vector<Scenario>& scenarios,
                          const BendersConfig& config = {});

}  // namespace gesha

#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gesha/core_model.hpp"
#include "gesha/lp_backend.hpp"
#include "gesha/scenarios.hpp"
#include "gesha/slp.hpp"
#include "gesha/stage_builders.hpp"

namespace gesha {

struct SubproblemConfig {
  SlpConfig slp;
  bool include_gas = true;
  std::string backend = "simplex";
};

struct SubproblemResult {
  double objective = 0.0;  // g(x, omega)
  RecourseSolution recourse;
  std::vector<double> lambda;  // d g / d x, indexed like x
  int slp_iterations = 0;
  bool converged = false;
  double max_residual = 0.0;
  std::string message;
  // Primal point and basis for warm starting a similar solve.
  SlpStart warm;
};

// g(x, omega) by SLP. Throws SolverError if a linearized LP is infeasible
// (relative complete recourse makes that a model error).
SubproblemResult solve_subproblem(const Instance& instance, std::span<const double> x,
                                  const Scenario& scenario, const SubproblemConfig& config,
                                  LpBackend& backend, const SlpStart* warm = nullptr);

// Steady gas state for per-node withdrawals (kg/s, original nodes), found by
// the SLP on a single-period copy of the network.
struct SteadyGasState {
  std::vector<double> m;       // per subpipe
  std::vector<double> pi;      // per discretized node
  std::vector<double> kappa;   // per compressor
  std::vector<double> mc;      // per compressor
  std::vector<double> supply;  // per supply
  std::vector<double> shed;    // per discretized node
  bool converged = false;
};

SteadyGasState steady_gas_state(const Instance& instance, const std::vector<double>& node_demand,
                                const SlpConfig& config, LpBackend& backend);

// Start point for the full second stage at (x, scenario): electric part at
// the nominal dispatch, gas part at the steady state of the first step's
// demand (including GFPP fuel at x), replicated over the horizon.
SlpStart steady_state_warm_start(const Instance& instance, std::span<const double> x,
                                 const SecondStage& stage, const SlpConfig& config,
                                 LpBackend& backend);

// Runs `task(i)` for i in [0, count) on up to `workers` threads.
void parallel_for(int count, int workers, const std::function<void(int)>& task);

}  // namespace gesha

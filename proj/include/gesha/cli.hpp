#pragma once

// Command-line front end: solve, evaluate, compare, validate, discretize.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace gesha {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,      // malformed command line
  kExitConfig = 3,     // invalid parameter values or combinations
  kExitData = 4,       // unreadable or inconsistent input files
  kExitSolver = 5,     // solver failure
  kExitInternal = 10,  // anything else
};

// Everything a run depends on; echoed to manifest.json so a run can be
// repeated from its manifest.
struct RunConfig {
  std::string instance;
  std::string scenarios;
  double split = 0.8;
  std::uint64_t seed = 1;
  int horizon = 0;  // 0 keeps the instance horizon
  double stress_gas = 1.0;
  double stress_non_gas = 1.0;
  std::string algorithm = "shace";

  double rho = 1.0;
  double a = 1000.0;
  std::string window = "inf";
  double tolerance = 1e-4;
  int max_iterations = 500;
  int min_iterations = 10;
  double time_limit = std::numeric_limits<double>::infinity();
  std::string q0_source = "master";
  double master_tolerance = 1e-4;
  int eval_every = 0;

  double benders_epsilon = 0.01;
  double benders_stall = 1e-4;
  int benders_max_iterations = 200;

  int slp_max_iterations = 50;
  double slp_radius = 0.1;
  double slp_smoothing = 1e-6;
  double slp_feasibility = 1e-7;
  int slp_corrections = 4;
  std::string backend = "simplex";
  int workers = 1;

  std::string out = "out";
  bool evaluate = false;  // also evaluate the solution on both scenario sets
};

// Throws ConfigError on invalid values.
void validate_run_config(const RunConfig& config);
std::string run_config_to_json(const RunConfig& config);
// Accepts a manifest written by `solve` (reads its "config" object) or a
// bare config object. Unknown keys are rejected.
RunConfig run_config_from_json(const std::string& text);

// Entry point; writes human-readable output to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gesha

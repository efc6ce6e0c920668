#include "gesha/lp_backend.hpp"

#include <string>

#include "gesha/errors.hpp"

namespace gesha {

std::string_view to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
    case LpStatus::kNumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

std::unique_ptr<LpBackend> make_lp_backend(std::string_view name) {
  if (name == "simplex" || name.empty()) return make_revised_simplex();
  if (name == "dense") return make_dense_simplex();
  throw ConfigError("unknown LP backend '" + std::string(name) + "' (expected simplex or dense)");
}

LpSolution solve_lp(const ConstraintSystem& system, LpBackend& backend,
                    const LpWarmStart* warm_start) {
  if (!system.is_linear()) {
    throw SolverError("solve_lp called on a system with nonlinear terms");
  }
  return backend.solve(system, warm_start);
}

}  // namespace gesha

#pragma once

// Linear programming interface. Every backend solves
//
//   min c.z + const   s.t.  row.lower <= A z <= row.upper,  lower <= z <= upper
//
// on an equilibrated copy of the system and reports results in the original
// units.
//
// Dual sign convention: duals[r] = d(optimal objective) / d(bound of row r),
// i.e. for an equality row a.z = b, raising b by delta changes the optimum by
// duals[r] * delta + o(delta). Inactive rows have zero dual. Reduced costs
// follow the same convention for column bounds.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gesha/constraint_system.hpp"

namespace gesha {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kNumericalFailure };

[[nodiscard]] std::string_view to_string(LpStatus status);

enum class BasisStatus : unsigned char { kBasic, kAtLower, kAtUpper, kFree };

// Column statuses followed by row (logical) statuses.
struct LpBasis {
  std::vector<BasisStatus> columns;
  std::vector<BasisStatus> rows;
  [[nodiscard]] bool matches(int num_cols, int num_rows) const {
    return static_cast<int>(columns.size()) == num_cols &&
           static_cast<int>(rows.size()) == num_rows;
  }
};

struct LpWarmStart {
  std::optional<LpBasis> basis;
  // Optional primal hint; nonbasic columns start at the bound closest to it.
  std::vector<double> primal;
};

struct LpSolution {
  LpStatus status = LpStatus::kNumericalFailure;
  std::vector<double> primal;
  std::vector<double> row_activity;
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  double objective = 0.0;
  int iterations = 0;
  LpBasis basis;
  // Row with the largest remaining infeasibility when status is infeasible.
  int infeasible_row_hint = -1;

  [[nodiscard]] bool optimal() const { return status == LpStatus::kOptimal; }
};

class LpBackend {
 public:
  virtual ~LpBackend() = default;
  [[nodiscard]] virtual std::string_view name() const = 0;
  // Precondition: system.is_linear().
  virtual LpSolution solve(const ConstraintSystem& system,
                           const LpWarmStart* warm_start = nullptr) = 0;
};

// Sparse revised bounded simplex (reference backend).
std::unique_ptr<LpBackend> make_revised_simplex();
// Dense-tableau bounded simplex with Bland pivoting; intended for small LPs.
std::unique_ptr<LpBackend> make_dense_simplex();

// "simplex" (default reference) or "dense". Throws ConfigError otherwise.
std::unique_ptr<LpBackend> make_lp_backend(std::string_view name);

// Convenience wrapper: throws SolverError when the system carries nonlinear
// terms.
LpSolution solve_lp(const ConstraintSystem& system, LpBackend& backend,
                    const LpWarmStart* warm_start = nullptr);

}  // namespace gesha

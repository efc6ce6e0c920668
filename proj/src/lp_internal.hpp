#pragma once

// Shared standard form for the simplex backends: columns 0..n-1 are the
// structural variables, columns n..n+m-1 are logicals s_i with A z - s = 0.
// Everything here lives in scaled space.

#include <vector>

#include "gesha/constraint_system.hpp"
#include "gesha/lp_backend.hpp"

namespace gesha::detail {

struct ScaledLp {
  int m = 0;
  int n = 0;
  // CSC storage of the structural part of A.
  std::vector<int> col_start;
  std::vector<int> row_index;
  std::vector<double> value;
  // Bounds and costs over all n + m columns.
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> cost;
  std::vector<double> row_scale;
  std::vector<double> col_scale;
  double cost_scale = 1.0;

  [[nodiscard]] int total() const { return n + m; }
};

struct ScaledResult {
  LpStatus status = LpStatus::kNumericalFailure;
  std::vector<double> x;  // n + m
  std::vector<double> y;  // m
  std::vector<double> d;  // n + m
  std::vector<BasisStatus> state;  // n + m
  int iterations = 0;
  int infeasible_row = -1;
};

ScaledLp build_scaled_lp(const ConstraintSystem& system);

// Initial nonbasic statuses from a warm start (or defaults), in scaled space.
std::vector<BasisStatus> initial_states(const ScaledLp& lp, const LpWarmStart* warm,
                                        bool* has_basis);

// Value a nonbasic column takes under a given status.
double nonbasic_value(const ScaledLp& lp, int j, BasisStatus s);

LpSolution unscale(const ConstraintSystem& system, const ScaledLp& lp,
                   const ScaledResult& result);

}  // namespace gesha::detail

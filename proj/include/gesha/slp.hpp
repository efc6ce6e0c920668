#pragma once

// Successive linear programming for ConstraintSystems with friction and
// bilinear terms: elastic l1 penalty on the nonlinear rows, box trust region
// on the variables that appear in nonlinear terms.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gesha/constraint_system.hpp"
#include "gesha/lp_backend.hpp"

namespace gesha {

struct SlpConfig {
  // Smoothing of |m| in phi(m) = m sqrt(m^2 + eps M0^2), scaled flow units.
  double smoothing = 1e-6;
  double initial_radius = 0.1;  // in units of Variable::scale
  double shrink = 0.5;
  double grow = 2.0;
  double accept_ratio = 0.1;
  double max_radius = 10.0;
  double step_tolerance = 1e-6;
  int max_iterations = 50;
  // Correction LPs per step that pull the trial point back onto the
  // nonlinear rows.
  int corrections = 4;
  // Largest scaled nonlinear residual accepted as feasible.
  double feasibility_tolerance = 1e-7;
  // l1 penalty on scaled nonlinear residuals; raised to four times the
  // largest observed multiplier, times 10 while elastics stay active.
  double initial_penalty = 1e4;
  double max_penalty = 1e13;

  // Throws ConfigError on inconsistent settings.
  void validate() const;
};

struct SlpStart {
  std::vector<double> z;
  std::optional<LpBasis> basis;
};

struct SlpResult {
  bool converged = false;
  int iterations = 0;
  std::vector<double> z;
  double objective = 0.0;  // true objective at z
  double max_residual = 0.0;
  // LP re-linearized at z without trust region; its duals give sensitivities.
  LpSolution final_lp;
  // Basis of the last elastic LP, reusable as a warm start.
  std::optional<LpBasis> basis;
  std::string message;
};

struct LinearizeOptions {
  bool elastic = true;
  // Fix the elastic columns at zero (same shape, no relaxation).
  bool fix_elastic = false;
  double penalty = 1e8;
  // Trust-region radius in units of Variable::scale; negative disables it.
  double radius = -1.0;
};

// Linear model of `system` at z. Elastic columns (two per nonlinear row) are
// appended after the original variables.
ConstraintSystem linearize_system(const ConstraintSystem& system, std::span<const double> z,
                                  const LinearizeOptions& options);

// Penalty merit: objective + penalty * sum over nonlinear rows of
// violation / residual_scale.
double slp_merit(const ConstraintSystem& system, std::span<const double> z, double penalty);

// Starting point used when none is supplied: zero clipped to the bounds,
// positive pressures for friction terms.
std::vector<double> default_start(const ConstraintSystem& system);

SlpResult solve_slp(const ConstraintSystem& system, const SlpConfig& config, LpBackend& backend,
                    const SlpStart* start = nullptr);

// Sensitivities d objective / d x_i from the FixLink rows of a solved system;
// result has `num_x` entries.
std::vector<double> fix_link_duals(const ConstraintSystem& system, const LpSolution& lp, int num_x);

}  // namespace gesha

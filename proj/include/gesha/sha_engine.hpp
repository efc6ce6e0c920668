#pragma once

// Stochastic hybrid approximation of E[g(x, omega)]: an initial model Q0 plus
// a linear correction lambda_bar refined from sampled subgradients.

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gesha/constraint_system.hpp"
#include "gesha/core_model.hpp"
#include "gesha/scenarios.hpp"
#include "gesha/slp.hpp"
#include "gesha/subproblem.hpp"

namespace gesha {

enum class ShaVariant {
  kConvex,                // SHACV: separable quadratic Q0
  kCertaintyEquivalent,   // SHACE: recourse of the mean scenario
  kExtremaEquivalent,     // SHAXE: mean recourse of the max/min wind scenarios
};

[[nodiscard]] std::string_view to_string(ShaVariant v);
// "shacv", "shace", "shaxe" (case-insensitive). Throws ConfigError.
ShaVariant parse_variant(std::string_view name);

// Averaging window n: the last n iterates, all of them, or the last floor(nu/2).
struct Window {
  enum class Kind { kFixed, kInfinite, kHalf };
  Kind kind = Kind::kInfinite;
  int length = 1;

  static Window fixed(int n);
  static Window infinite() { return {}; }
  static Window half() { return {Kind::kHalf, 1}; }
  // First iteration (1-based) inside the window at iteration nu.
  [[nodiscard]] int first(int nu) const;
  [[nodiscard]] std::string label() const;
};
// "inf", "half" (or "nu/2") or a positive integer. Throws ConfigError.
Window parse_window(std::string_view text);

// Where q0, the gradient of the initial recourse model, comes from for SHACE
// and SHAXE: fresh subproblem solves at x, or the duals of the recourse copies
// embedded in the master. At a kink the two can pick different subgradients.
// SHACV calibrates b from the same source.
enum class GradientSource { kSubproblem, kMaster };

[[nodiscard]] std::string_view to_string(GradientSource s);
// "subproblem" or "master". Throws ConfigError.
GradientSource parse_gradient_source(std::string_view name);

struct ShaConfig {
  ShaVariant variant = ShaVariant::kCertaintyEquivalent;
  GradientSource q0_source = GradientSource::kMaster;
  double rho = 1.0;
  double a = 1000.0;  // SHACV curvature on per-unit dispatch
  Window window;
  double tolerance = 1e-4;
  int max_iterations = 500;
  // No tolerance stop before this many iterations.
  int min_iterations = 10;
  double time_limit = std::numeric_limits<double>::infinity();  // seconds
  std::uint64_t seed = 1;
  // Relative accuracy of the piecewise-linear SHACV quadratic.
  double master_tolerance = 1e-4;
  // V(x_bar) on the training set every k iterations; 0 disables.
  int evaluation_interval = 0;
  int workers = 1;
  SubproblemConfig subproblem;

  // Throws ConfigError.
  void validate() const;
};

// --- update algebra -------------------------------------------------------

// alpha = rho / nu.
double step_size(int nu, double rho);
// lambda_bar + alpha (lambda - q0 - lambda_bar); throws ConfigError on
// dimension mismatch or non-positive alpha.
std::vector<double> sha_update(std::span<const double> lambda_bar, std::span<const double> lambda,
                               std::span<const double> q0, double alpha);
// b = lambda - 2 a x (all per unit).
std::vector<double> calibrate_b(double a, std::span<const double> x, std::span<const double> lambda);
// ||x_bar - x_prev|| / ||x_bar||, or the plain difference norm when x_bar = 0.
double solution_update_metric(std::span<const double> x_bar, std::span<const double> x_prev);

// Iterates x^(i) with weights 1/alpha^(i) and their windowed average.
class IterateAverage {
 public:
  explicit IterateAverage(Window window) : window_(window) {}
  void push(std::span<const double> x, double alpha);
  [[nodiscard]] std::vector<double> average() const;
  [[nodiscard]] int count() const { return count_; }

 private:
  Window window_;
  int count_ = 0;
  // Running sums for the infinite window.
  std::vector<double> sum_wx_;
  double sum_w_ = 0.0;
  // Retained (x, 1/alpha) for finite and half windows.
  std::deque<std::pair<std::vector<double>, double>> kept_;
};

// Weighted average of x^(i) over the window at nu = xs.size(), weights 1/alpha.
std::vector<double> weighted_average(const std::vector<std::vector<double>>& xs,
                                     const std::vector<double>& alphas, Window window);

// --- masters --------------------------------------------------------------

// Separable quadratic Q0(x) = sum_i a (x_i / base)^2 + b_i (x_i / base).
struct ConvexModel {
  double a = 1000.0;
  double base = 100.0;
  std::vector<double> b;
  [[nodiscard]] double value(std::span<const double> x) const;
  // dQ0/dx_i in cost per MW.
  [[nodiscard]] std::vector<double> gradient(std::span<const double> x) const;
};

struct MasterSolution {
  std::vector<double> x;
  double objective = 0.0;  // S(x)
  // Recourse-model gradient at x taken from the master's own link rows
  // (recourse masters only).
  std::vector<double> model_gradient;
  bool converged = true;
  std::string message;
};

// min f(x) + Q0(x) + lambda_bar.x over X with Q0 replaced by tangent cuts,
// refined until the model error is within `tolerance` relative. The cut pool
// persists between calls.
class ConvexMaster {
 public:
  ConvexMaster(const Instance& instance, ConvexModel model, LpBackend& backend, double tolerance);
  MasterSolution solve(std::span<const double> lambda_bar);
  [[nodiscard]] int num_cuts() const;
  [[nodiscard]] const ConvexModel& model() const { return model_; }

 private:
  void add_cut(int i, double x);
  const Instance& inst_;
  ConvexModel model_;
  LpBackend& backend_;
  double tolerance_;
  ConstraintSystem lp_;
  std::vector<int> epi_;  // epigraph column per x_i
  std::optional<LpBasis> basis_;
  int base_rows_ = 0;
};

// min f(x) + sum_k w_k g(x, omega_k) + lambda_bar.x by SLP over x and the
// embedded recourse copies; warm-started from the previous solve.
class RecourseMaster {
 public:
  RecourseMaster(const Instance& instance, const std::vector<Scenario>& scenarios,
                 const std::vector<double>& weights, const SubproblemConfig& config,
                 LpBackend& backend);
  MasterSolution solve(std::span<const double> lambda_bar);
  [[nodiscard]] const ConstraintSystem& system() const { return sys_; }
  // Full SLP point (x and every recourse copy) of the last solve.
  [[nodiscard]] const std::vector<double>& last_point() const { return warm_.z; }
  [[nodiscard]] int last_iterations() const { return last_iterations_; }

 private:
  const Instance& inst_;
  SubproblemConfig config_;
  LpBackend& backend_;
  ConstraintSystem sys_;
  std::vector<double> base_cost_;  // first-stage cost of the x columns
  SlpStart warm_;
  int last_iterations_ = 0;
};

// --- the loop -------------------------------------------------------------

struct ShaRecord {
  int nu = 0;
  double wall = 0.0;  // seconds since start
  std::string scenario;
  double master_objective = 0.0;  // S(x^(nu))
  double delta = std::numeric_limits<double>::quiet_NaN();
  double value = std::numeric_limits<double>::quiet_NaN();  // V(x_bar), when evaluated
  bool flagged = false;  // a subproblem of this iteration failed
};

struct ShaResult {
  std::vector<double> x_bar;
  std::vector<double> x_last;
  std::vector<double> lambda_bar;
  std::vector<ShaRecord> history;
  std::string stop_reason;  // "tolerance", "iteration_limit", "time_limit"
  int iterations = 0;
};

ShaResult run_sha(const Instance& instance, const ScenarioSet& scenarios, const ShaConfig& config);

}  // namespace gesha

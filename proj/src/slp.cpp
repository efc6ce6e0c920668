#include "gesha/slp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gesha/errors.hpp"
#include "gesha/linearization.hpp"

namespace gesha {

void SlpConfig::validate() const {
  if (!(smoothing > 0.0)) throw ConfigError("SLP smoothing must be positive");
  if (!(initial_radius > 0.0)) throw ConfigError("SLP trust radius must be positive");
  if (!(shrink > 0.0 && shrink < 1.0)) throw ConfigError("SLP shrink factor must lie in (0, 1)");
  if (!(grow > 1.0)) throw ConfigError("SLP grow factor must exceed 1");
  if (!(accept_ratio > 0.0 && accept_ratio < 1.0)) throw ConfigError("SLP acceptance ratio must lie in (0, 1)");
  if (!(step_tolerance > 0.0)) throw ConfigError("SLP step tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("SLP needs at least one iteration");
  if (!(feasibility_tolerance > 0.0)) throw ConfigError("SLP feasibility tolerance must be positive");
  if (!(initial_penalty > 0.0) || max_penalty < initial_penalty) throw ConfigError("SLP penalty settings invalid");
}

namespace {

// Nonlinear rows in order of first appearance with their residual scale.
struct NonlinearRows {
  std::vector<int> rows;
  std::vector<double> scale;
  std::vector<char> in_term;  // per column
};

NonlinearRows nonlinear_rows(const ConstraintSystem& sys) {
  NonlinearRows out;
  out.in_term.assign(static_cast<std::size_t>(sys.num_variables()), 0);
  std::map<int, std::size_t> seen;
  for (const auto& t : sys.nonlinear()) {
    if (seen.emplace(t.row, out.rows.size()).second) {
      out.rows.push_back(t.row);
      out.scale.push_back(t.residual_scale);
    }
    out.in_term[t.first] = 1;
    out.in_term[t.second] = 1;
  }
  return out;
}

// Linear model value of nonlinear row r at z (elastics excluded).
double model_value(const ConstraintSystem& model, int r, std::span<const double> z, double constant) {
  double v = constant;
  for (const auto& e : model.rows()[r].entries) {
    if (e.col < static_cast<int>(z.size())) v += e.value * z[e.col];
  }
  return v;
}

double violation(double act, double lo, double hi) {
  if (act < lo) return lo - act;
  if (act > hi) return act - hi;
  return 0.0;
}

}  // namespace

ConstraintSystem linearize_system(const ConstraintSystem& sys, std::span<const double> z,
                                  const LinearizeOptions& opt) {
  ConstraintSystem lp;
  const auto nl = nonlinear_rows(sys);
  for (int j = 0; j < sys.num_variables(); ++j) {
    const auto& v = sys.variables()[j];
    double lo = v.lower;
    double hi = v.upper;
    if (opt.radius > 0.0 && nl.in_term[j]) {
      const double r = opt.radius * v.scale;
      lo = std::max(lo, std::min(z[j] - r, hi));
      hi = std::min(hi, std::max(z[j] + r, lo));
    }
    lp.add_variable(v.name, lo, hi, v.cost, v.scale);
  }
  for (const auto& row : sys.rows()) lp.add_row(row.name, row.lower, row.upper, row.entries);
  lp.fix_links() = sys.fix_links();
  lp.set_objective_constant(sys.objective_constant());
  for (const auto& term : sys.nonlinear()) {
    const auto lin = linearize(term, z);
    const double constant = lin.value - lin.d_first * z[term.first] - lin.d_second * z[term.second];
    if (lin.d_first != 0.0) lp.add_coefficient(term.row, term.first, lin.d_first);
    if (lin.d_second != 0.0) lp.add_coefficient(term.row, term.second, lin.d_second);
    auto& row = lp.rows()[term.row];
    row.lower -= constant;
    row.upper -= constant;
  }
  if (opt.elastic) {
    for (std::size_t k = 0; k < nl.rows.size(); ++k) {
      const double hi = opt.fix_elastic ? 0.0 : kInf;
      const double cost = opt.penalty / nl.scale[k];
      const auto& name = sys.rows()[nl.rows[k]].name;
      const int up = lp.add_variable("elastic+" + name, 0.0, hi, cost, 1e-4 * nl.scale[k]);
      const int dn = lp.add_variable("elastic-" + name, 0.0, hi, cost, 1e-4 * nl.scale[k]);
      lp.add_coefficient(nl.rows[k], up, 1.0);
      lp.add_coefficient(nl.rows[k], dn, -1.0);
    }
  }
  return lp;
}

double slp_merit(const ConstraintSystem& sys, std::span<const double> z, double penalty) {
  double merit = sys.objective(z);
  const auto nl = nonlinear_rows(sys);
  for (std::size_t k = 0; k < nl.rows.size(); ++k) {
    const auto& row = sys.rows()[nl.rows[k]];
    merit += penalty * violation(sys.row_activity(nl.rows[k], z), row.lower, row.upper) / nl.scale[k];
  }
  return merit;
}

std::vector<double> default_start(const ConstraintSystem& sys) {
  std::vector<double> z(static_cast<std::size_t>(sys.num_variables()));
  for (int j = 0; j < sys.num_variables(); ++j) {
    const auto& v = sys.variables()[j];
    z[j] = std::clamp(0.0, v.lower, v.upper);
  }
  for (const auto& t : sys.nonlinear()) {
    if (t.kind != NonlinearKind::kFriction || z[t.second] > 0.0) continue;
    const auto& v = sys.variables()[t.second];
    z[t.second] = std::isfinite(v.upper) ? 0.5 * (std::max(v.lower, 0.0) + v.upper)
                                         : std::max(v.lower, 0.0) + t.residual_scale;
  }
  return z;
}

std::vector<double> fix_link_duals(const ConstraintSystem& sys, const LpSolution& lp, int num_x) {
  std::vector<double> lambda(static_cast<std::size_t>(num_x), 0.0);
  if (lp.duals.empty()) return lambda;
  for (const auto& link : sys.fix_links()) {
    if (link.x_index >= 0 && link.x_index < num_x) lambda[link.x_index] += lp.duals[link.row];
  }
  return lambda;
}

SlpResult solve_slp(const ConstraintSystem& sys, const SlpConfig& cfg, LpBackend& backend,
                    const SlpStart* start) {
  cfg.validate();
  const int n = sys.num_variables();
  SlpResult res;

  if (sys.is_linear()) {
    LpWarmStart warm;
    if (start != nullptr) {
      warm.basis = start->basis;
      warm.primal = start->z;
    }
    res.final_lp = backend.solve(sys, &warm);
    res.iterations = 1;
    res.converged = res.final_lp.optimal();
    if (!res.converged) {
      res.message = std::string("LP ") + std::string(to_string(res.final_lp.status));
      return res;
    }
    res.z = res.final_lp.primal;
    res.objective = sys.objective(res.z);
    res.basis = res.final_lp.basis;
    return res;
  }

  std::vector<double> z = (start != nullptr && static_cast<int>(start->z.size()) == n) ? start->z
                                                                                       : default_start(sys);
  for (const auto& t : sys.nonlinear()) {
    if (t.kind == NonlinearKind::kFriction && !(z[t.second] > 0.0)) z = default_start(sys);
  }
  const auto nl = nonlinear_rows(sys);
  double penalty = cfg.initial_penalty;
  double radius = cfg.initial_radius;
  bool trusted = false;  // z satisfies the linear rows
  bool raised = false;   // penalty raised since the last accepted step
  LpWarmStart warm;
  if (start != nullptr) warm.basis = start->basis;

  auto elastic_sum = [&](const std::vector<double>& primal) {
    double s = 0.0;
    for (std::size_t k = 0; k < nl.rows.size(); ++k) {
      s += (primal[n + 2 * k] + primal[n + 2 * k + 1]) / nl.scale[k];
    }
    return s;
  };

  for (int it = 0; it < cfg.max_iterations; ++it) {
    res.iterations = it + 1;
    LinearizeOptions opt;
    opt.penalty = penalty;
    opt.radius = radius;
    auto model = linearize_system(sys, z, opt);
    std::vector<double> constants(nl.rows.size());
    for (std::size_t k = 0; k < nl.rows.size(); ++k) {
      const auto& orig = sys.rows()[nl.rows[k]];
      const auto& row = model.rows()[nl.rows[k]];
      constants[k] = std::isfinite(orig.lower) ? orig.lower - row.lower : orig.upper - row.upper;
    }
    auto sol = backend.solve(model, &warm);
    if (sol.status == LpStatus::kInfeasible) {
      // Linear rows unreachable inside the box: widen it, finally drop it.
      if (radius >= cfg.max_radius) {
        opt.radius = -1.0;
        model = linearize_system(sys, z, opt);
        sol = backend.solve(model, &warm);
      } else {
        radius = std::min(cfg.max_radius, radius * 4.0);
        continue;
      }
    }
    if (!sol.optimal()) {
      res.message = std::string("linearized LP ") + std::string(to_string(sol.status));
      break;
    }
    warm.basis = sol.basis;
    std::vector<double> z_new(sol.primal.begin(), sol.primal.begin() + n);
    double step = 0.0;
    for (int j = 0; j < n; ++j) {
      step = std::max(step, std::abs(z_new[j] - z[j]) / sys.variables()[j].scale);
    }
    // The LP does not move a feasible point although the box allows it; any
    // predicted decrease left is round-off at the current penalty.
    if (trusted && step <= cfg.step_tolerance && radius > 10.0 * cfg.step_tolerance &&
        sys.max_nonlinear_residual(z) <= cfg.feasibility_tolerance) {
      res.converged = true;
      break;
    }

    // Keep the penalty a safe margin above the multipliers of rows whose
    // elastics are inactive; l1 exactness only needs it above them. While
    // any elastic is active those multipliers are priced by the penalty
    // itself, so only a feasible step is consulted.
    double needed = 0.0;
    const bool elastics_idle = elastic_sum(sol.primal) <= cfg.feasibility_tolerance;
    for (std::size_t k = 0; elastics_idle && k < nl.rows.size() && !sol.duals.empty(); ++k) {
      if (sol.primal[n + 2 * k] + sol.primal[n + 2 * k + 1] > 0.0) continue;
      const double y = std::abs(sol.duals[nl.rows[k]]) * nl.scale[k];
      // A multiplier at the penalty price means a degenerate elastic, not a
      // reason to raise the price.
      if (y >= 0.999 * penalty) continue;
      needed = std::max(needed, 4.0 * y);
    }
    // Degenerate duals can track the penalty, so raise at most once per step.
    if (needed > penalty && penalty < cfg.max_penalty && !raised) {
      penalty = std::min(cfg.max_penalty, needed);
      raised = true;
      continue;
    }

    const double merit_old = slp_merit(sys, z, penalty);
    const double merit_new = slp_merit(sys, z_new, penalty);
    const double predicted = merit_old - sol.objective;
    const double actual = merit_old - merit_new;
    const double tiny = 1e-11 * (1.0 + std::abs(merit_old));

    if (trusted && predicted <= tiny) {
      // No model improvement available: stationary for the current penalty.
      if (sys.max_nonlinear_residual(z) <= cfg.feasibility_tolerance) {
        res.converged = true;
        break;
      }
      if (penalty >= cfg.max_penalty) {
        res.message = "stationary point of the penalty function is infeasible";
        break;
      }
      penalty = std::min(cfg.max_penalty, penalty * 10.0);
      continue;
    }

    double ratio = predicted > 0.0 ? actual / predicted : -1.0;
    if (trusted) {
      // Second-order corrections: re-solve the same model with the nonlinear
      // rows shifted by the model error at the trial point (a chord iteration
      // back onto the constraint manifold).
      auto trial = z_new;
      for (int c = 0; c < cfg.corrections; ++c) {
        if (sys.max_nonlinear_residual(trial) <= 0.01 * cfg.feasibility_tolerance) break;
        auto corrected = model;
        for (std::size_t k = 0; k < nl.rows.size(); ++k) {
          const int r = nl.rows[k];
          const double err = sys.row_activity(r, trial) - model_value(model, r, trial, constants[k]);
          corrected.rows()[r].lower -= err;
          corrected.rows()[r].upper -= err;
        }
        const auto soc = backend.solve(corrected, &warm);
        if (!soc.optimal()) break;
        trial.assign(soc.primal.begin(), soc.primal.begin() + n);
      }
      const double ratio_soc = predicted > 0.0 ? (merit_old - slp_merit(sys, trial, penalty)) / predicted : -1.0;
      if (ratio_soc > ratio) {
        ratio = ratio_soc;
        z_new = std::move(trial);
        step = 0.0;
        for (int j = 0; j < n; ++j) {
          step = std::max(step, std::abs(z_new[j] - z[j]) / sys.variables()[j].scale);
        }
      }
    }
    if (!trusted || ratio >= cfg.accept_ratio) {
      z = std::move(z_new);
      trusted = true;
      raised = false;
      const bool at_boundary = step >= 0.99 * radius;
      if (ratio > 0.75 && at_boundary) radius = std::min(cfg.max_radius, radius * cfg.grow);
      const double residual = sys.max_nonlinear_residual(z);
      if (residual <= cfg.feasibility_tolerance &&
          (step <= cfg.step_tolerance || predicted <= 1e-9 * (1.0 + std::abs(merit_old)))) {
        res.converged = true;
        break;
      }
      if (!at_boundary && elastic_sum(sol.primal) > cfg.feasibility_tolerance) {
        penalty = std::min(cfg.max_penalty, penalty * 10.0);
      }
    } else {
      radius *= cfg.shrink;
      if (radius < 1e-14) {
        res.message = "trust region collapsed";
        break;
      }
    }
  }
  if (!res.converged && res.message.empty()) res.message = "iteration limit reached";

  res.z = z;
  res.objective = sys.objective(z);
  res.max_residual = sys.max_nonlinear_residual(z);
  res.basis = warm.basis;

  // Fixed linearization at the final point: same shape as the elastic LPs,
  // elastic columns pinned to zero, no trust region.
  LinearizeOptions fixed;
  fixed.penalty = penalty;
  fixed.fix_elastic = true;
  auto final_lp = backend.solve(linearize_system(sys, z, fixed), &warm);
  if (!final_lp.optimal()) {
    fixed.fix_elastic = false;
    final_lp = backend.solve(linearize_system(sys, z, fixed), &warm);
  }
  if (final_lp.optimal()) {
    final_lp.primal.resize(static_cast<std::size_t>(n));
    final_lp.reduced_costs.resize(static_cast<std::size_t>(n));
  } else if (res.message.empty() || res.converged) {
    res.message = std::string("final linearization ") + std::string(to_string(final_lp.status));
  }
  res.final_lp = std::move(final_lp);
  return res;
}

}  // namespace gesha

#include "gesha/benchmarks.hpp"

#include <chrono>
#include <cmath>
#include <optional>

#include "gesha/errors.hpp"
#include "gesha/sha_engine.hpp"
#include "gesha/stage_builders.hpp"

namespace gesha {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double relative(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

OneShotResult solve_one_shot(const Instance& inst, const std::vector<Scenario>& scenarios,
                             const SubproblemConfig& config) {
  if (scenarios.empty()) throw ConfigError("one-shot needs at least one scenario");
  const auto t0 = Clock::now();
  auto backend = make_lp_backend(config.backend);
  const std::vector<double> weights(scenarios.size(), 1.0 / static_cast<double>(scenarios.size()));
  RecourseMaster master(inst, scenarios, weights, config, *backend);
  const auto sol = master.solve(std::vector<double>(static_cast<std::size_t>(inst.num_x()), 0.0));
  OneShotResult out;
  out.x = sol.x;
  out.objective = sol.objective;
  out.converged = sol.converged;
  out.message = sol.message;
  out.max_residual = master.system().max_nonlinear_residual(master.last_point());
  out.slp_iterations = master.last_iterations();
  out.wall = since(t0);
  return out;
}

OneShotResult solve_opf_only(const Instance& inst, const std::vector<Scenario>& scenarios,
                             const SubproblemConfig& config) {
  auto cfg = config;
  cfg.include_gas = false;
  return solve_one_shot(without_gas(inst), scenarios, cfg);
}

void BendersConfig::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("Benders epsilon must be positive");
  if (!(stall_tolerance >= 0.0)) throw ConfigError("Benders stall tolerance must be non-negative");
  if (max_iterations < 1) throw ConfigError("Benders max_iterations must be at least 1");
  if (!(time_limit > 0.0)) throw ConfigError("time limit must be positive");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  subproblem.slp.validate();
}

double BendersCut::evaluate(std::span<const double> x) const {
  double v = value;
  for (std::size_t i = 0; i < x.size(); ++i) v += gradient[i] * (x[i] - point[i]);
  return v;
}

double BendersResult::gap() const {
  if (!std::isfinite(lower) || !std::isfinite(upper)) return std::numeric_limits<double>::infinity();
  return (upper - lower) / std::max(1.0, std::abs(upper));
}

BendersResult run_benders(const Instance& inst, const std::vector<Scenario>& scenarios,
                          const BendersConfig& cfg) {
  cfg.validate();
  if (scenarios.empty()) throw ConfigError("Benders needs at least one scenario");
  const auto t0 = Clock::now();
  const int n = inst.num_x();
  const int ns = static_cast<int>(scenarios.size());
  const double w = 1.0 / ns;

  auto master_backend = make_lp_backend(cfg.subproblem.backend);
  ConstraintSystem master = build_first_stage(inst);
  std::vector<int> eta;
  for (int k = 0; k < ns; ++k) {
    eta.push_back(master.add_variable("eta[" + scenarios[k].name + "]", -kInf, kInf, w, 1e3));
  }
  std::optional<LpBasis> basis;

  // Without cuts the master is unbounded in eta, so the first point is the
  // cheapest first-stage schedule.
  const auto first = master_backend->solve(build_first_stage(inst));
  if (!first.optimal()) throw SolverError("first-stage LP " + std::string(to_string(first.status)));
  std::vector<double> x(first.primal.begin(), first.primal.begin() + n);

  std::vector<std::optional<SlpStart>> warm(ns);
  BendersResult res;
  res.stop_reason = "iteration_limit";
  double lower = -kInf;
  double prev_lower = kInf, prev_upper = kInf;

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    if (since(t0) > cfg.time_limit) {
      res.stop_reason = "time_limit";
      break;
    }
    std::vector<SubproblemResult> solved(ns);
    std::vector<char> failed(ns, 0);
    parallel_for(ns, cfg.workers, [&](int k) {
      auto backend = make_lp_backend(cfg.subproblem.backend);
      try {
        solved[k] = solve_subproblem(inst, x, scenarios[k], cfg.subproblem, *backend,
                                     warm[k] ? &*warm[k] : nullptr);
      } catch (const SolverError&) {
        failed[k] = 1;
      }
    });
    double upper = first_stage_cost(inst, x);
    bool complete = true;
    for (int k = 0; k < ns; ++k) {
      if (failed[k]) {
        ++res.failed_solves;
        complete = false;
        warm[k].reset();
        continue;
      }
      warm[k] = solved[k].warm;
      upper += w * solved[k].objective;
      BendersCut cut{k, it, solved[k].objective, solved[k].lambda, x};
      double rhs = cut.value;
      std::vector<Entry> entries{{eta[k], 1.0}};
      for (int i = 0; i < n; ++i) {
        rhs -= cut.gradient[i] * x[i];
        if (cut.gradient[i] != 0.0) entries.push_back({i, -cut.gradient[i]});
      }
      master.add_row("cut[" + scenarios[k].name + "," + std::to_string(it) + "]", rhs, kInf,
                     std::move(entries));
      if (basis) basis->rows.push_back(BasisStatus::kBasic);
      res.cuts.push_back(std::move(cut));
    }
    if (!complete) upper = kInf;
    if (it == 1 && !complete) throw SolverError("Benders: a subproblem failed at the first point");
    if (upper < res.upper) {
      res.upper = upper;
      res.x = x;
    }

    LpWarmStart ws;
    ws.basis = basis;
    const auto sol = master_backend->solve(master, &ws);
    if (!sol.optimal()) throw SolverError("Benders master LP " + std::string(to_string(sol.status)));
    basis = sol.basis;
    lower = sol.objective;
    res.lower = lower;
    res.history.push_back({it, lower, upper, since(t0)});
    res.iterations = it;
    x.assign(sol.primal.begin(), sol.primal.begin() + n);

    if (res.gap() <= cfg.epsilon) {
      res.stop_reason = "gap";
      break;
    }
    if (std::isfinite(upper) && std::isfinite(prev_upper) && relative(lower, prev_lower) < cfg.stall_tolerance &&
        relative(upper, prev_upper) < cfg.stall_tolerance) {
      res.stop_reason = "stalled";
      break;
    }
    prev_lower = lower;
    prev_upper = upper;
  }
  return res;
}

}  // namespace gesha

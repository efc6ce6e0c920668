#include "gesha/evaluator.hpp"

#include <algorithm>
#include <numeric>

#include "gesha/errors.hpp"
#include "gesha/stage_builders.hpp"

namespace gesha {

namespace {

double percent(double part, double whole) {
  if (!(whole > 0.0)) return 0.0;
  return std::clamp(100.0 * part / whole, 0.0, 100.0);
}

double grid_sum(const Grid& g) {
  double s = 0.0;
  for (const auto& row : g) s = std::accumulate(row.begin(), row.end(), s);
  return s;
}

ScenarioOutcome outcome(const Instance& inst, std::span<const double> x, const Scenario& scenario,
                        const SubproblemConfig& config) {
  ScenarioOutcome out;
  out.name = scenario.name;
  const double hours = inst.time.hours();
  const auto wind = wind_output(inst.electric, scenario);
  out.wind_available = hours * grid_sum(wind);
  out.load = hours * grid_sum(inst.electric.load);
  if (config.include_gas && inst.has_gas()) out.gas_demand = inst.time.dt * grid_sum(inst.gas.demand);

  auto backend = make_lp_backend(config.backend);
  try {
    const auto res = solve_subproblem(inst, x, scenario, config, *backend);
    const auto& r = res.recourse;
    out.converged = res.converged;
    out.message = res.message;
    out.g = res.objective;
    out.h_elec = r.h_elec;
    out.h_gas_net = r.h_gas - r.correction;
    out.slp_iterations = res.slp_iterations;
    out.max_residual = res.max_residual;
    out.wind_spill = hours * grid_sum(r.spill);
    out.load_shed = hours * grid_sum(r.shed);
    out.gas_shed = inst.time.dt * grid_sum(r.gas_shed);
    for (const auto& link : inst.coupling.gfpps) {
      for (int t = 0; t < inst.num_steps(); ++t) {
        out.gfpp_energy += hours * (r.p[link.generator][t] + r.p_up[link.generator][t] -
                                    r.p_down[link.generator][t]);
      }
    }
  } catch (const SolverError& e) {
    out.failed = true;
    out.message = e.what();
  }
  return out;
}

}  // namespace

double ScenarioOutcome::spill_percent() const { return percent(wind_spill, wind_available); }
double ScenarioOutcome::load_shed_percent() const { return percent(load_shed, load); }
double ScenarioOutcome::gas_shed_percent() const { return percent(gas_shed, gas_demand); }

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.max = *std::max_element(values.begin(), values.end());
  s.min = *std::min_element(values.begin(), values.end());
  return s;
}

EvaluationReport evaluate(const Instance& inst, std::span<const double> x,
                          const std::vector<Scenario>& scenarios, const EvaluateOptions& options) {
  if (static_cast<int>(x.size()) != inst.num_x()) {
    throw DataError("first-stage vector has " + std::to_string(x.size()) + " entries, expected " +
                    std::to_string(inst.num_x()));
  }
  EvaluationReport rep;
  rep.label = options.label;
  rep.currency = inst.currency;
  rep.out_of_sample = options.out_of_sample;
  rep.first_stage_cost = first_stage_cost(inst, x);
  for (const auto& link : inst.coupling.gfpps) {
    for (int t = 0; t < inst.num_steps(); ++t) {
      rep.first_stage_gfpp_energy += inst.time.hours() * x[inst.x_index(link.generator, t)];
    }
  }

  rep.scenarios.resize(scenarios.size());
  parallel_for(static_cast<int>(scenarios.size()), options.workers, [&](int i) {
    rep.scenarios[i] = outcome(inst, x, scenarios[i], options.subproblem);
  });

  std::vector<double> g, he, hg, spill, shed, gshed;
  for (const auto& s : rep.scenarios) {
    if (s.failed) {
      ++rep.failed;
      continue;
    }
    if (!s.converged) ++rep.not_converged;
    g.push_back(s.g);
    he.push_back(s.h_elec);
    hg.push_back(s.h_gas_net);
    spill.push_back(s.spill_percent());
    shed.push_back(s.load_shed_percent());
    gshed.push_back(s.gas_shed_percent());
  }
  rep.g = summarize(g);
  rep.second_stage_elec = summarize(he);
  rep.second_stage_gas = summarize(hg);
  rep.wind_spill_pct = summarize(spill);
  rep.load_shed_pct = summarize(shed);
  rep.gas_shed_pct = summarize(gshed);
  rep.value = rep.first_stage_cost + rep.g.mean;
  return rep;
}

std::vector<EvaluationReport> compare(const Instance& inst, const std::vector<Candidate>& candidates,
                                      const std::vector<Scenario>& scenarios,
                                      const EvaluateOptions& options) {
  std::vector<EvaluationReport> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    auto opt = options;
    opt.label = c.label;
    out.push_back(evaluate(inst, c.x, scenarios, opt));
  }
  return out;
}

}  // namespace gesha

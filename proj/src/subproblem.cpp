#include "gesha/subproblem.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "gesha/errors.hpp"

namespace gesha {

SteadyGasState steady_gas_state(const Instance& instance, const std::vector<double>& node_demand,
                                const SlpConfig& config, LpBackend& backend) {
  Instance one = instance;
  one.time.steps = 1;
  one.coupling = CouplingMap{};
  one.gas.demand.assign(one.gas.nodes.size(), std::vector<double>(1, 0.0));
  for (std::size_t n = 0; n < one.gas.nodes.size() && n < node_demand.size(); ++n) {
    one.gas.demand[n][0] = node_demand[n];
  }
  one.finalize();
  ConstraintSystem sys;
  GasOptions gopt;
  gopt.smoothing = config.smoothing;
  const auto idx = build_second_stage_gas(sys, one, gopt);

  SlpStart start;
  start.z = default_start(sys);
  const double ref = one.gas.slack_pressure;
  for (int v : idx.pi) start.z[v] = std::clamp(ref, sys.variables()[v].lower, sys.variables()[v].upper);
  for (int v : idx.pi_avg) start.z[v] = ref;
  const auto res = solve_slp(sys, config, backend, &start);
  if (res.z.empty()) throw SolverError("steady gas state: " + res.message);

  SteadyGasState out;
  out.converged = res.converged;
  for (int v : idx.m_avg) out.m.push_back(res.z[v]);
  for (int v : idx.pi) out.pi.push_back(res.z[v]);
  for (int v : idx.kappa) out.kappa.push_back(res.z[v]);
  for (int v : idx.mc) out.mc.push_back(res.z[v]);
  for (int v : idx.supply) out.supply.push_back(res.z[v]);
  for (int v : idx.shed) out.shed.push_back(res.z[v]);
  return out;
}

SlpStart steady_state_warm_start(const Instance& inst, std::span<const double> x,
                                 const SecondStage& stage, const SlpConfig& config,
                                 LpBackend& backend) {
  SlpStart start;
  start.z = default_start(stage.system);
  auto& z = start.z;
  const int steps = inst.num_steps();
  const auto& e = stage.layout.electric;
  for (int g = 0; g < inst.num_generators(); ++g) {
    for (int t = 0; t < steps; ++t) z[e.p[g * steps + t]] = x[inst.x_index(g, t)];
  }
  if (!stage.layout.has_gas) return start;

  const auto& gi = stage.layout.gas;
  const auto& d = inst.discretized;
  std::vector<double> demand(inst.gas.nodes.size(), 0.0);
  for (std::size_t n = 0; n < demand.size(); ++n) demand[n] = inst.gas.demand[n][0];
  for (std::size_t k = 0; k < inst.coupling.gfpps.size(); ++k) {
    const auto& link = inst.coupling.gfpps[k];
    demand[link.gas_node] += heat_rate_si(link.heat_rate) * std::max(0.0, x[inst.x_index(link.generator, 0)]);
  }
  const auto steady = steady_gas_state(inst, demand, config, backend);
  for (int t = 0; t < steps; ++t) {
    for (std::size_t s = 0; s < d.subpipes.size(); ++s) {
      const auto k = s * steps + t;
      z[gi.m_in[k]] = z[gi.m_out[k]] = z[gi.m_avg[k]] = steady.m[s];
      z[gi.pi_avg[k]] = 0.5 * (steady.pi[d.subpipes[s].from] + steady.pi[d.subpipes[s].to]);
    }
    for (int n = 0; n < d.num_nodes(); ++n) {
      const auto k = n * steps + t;
      const auto& v = stage.system.variables()[gi.pi[k]];
      z[gi.pi[k]] = std::clamp(steady.pi[n], v.lower, v.upper);
      const auto& sv = stage.system.variables()[gi.shed[k]];
      z[gi.shed[k]] = std::clamp(steady.shed[n], sv.lower, sv.upper);
    }
    for (std::size_t c = 0; c < inst.gas.compressors.size(); ++c) {
      z[gi.kappa[c * steps + t]] = steady.kappa[c];
      z[gi.mc[c * steps + t]] = steady.mc[c];
    }
    for (std::size_t s = 0; s < inst.gas.supplies.size(); ++s) z[gi.supply[s * steps + t]] = steady.supply[s];
    for (std::size_t k = 0; k < inst.coupling.gfpps.size(); ++k) {
      const auto& link = inst.coupling.gfpps[k];
      z[gi.gfpp_demand[k * steps + t]] =
          heat_rate_si(link.heat_rate) * std::max(0.0, x[inst.x_index(link.generator, t)]);
    }
  }
  return start;
}

SubproblemResult solve_subproblem(const Instance& inst, std::span<const double> x,
                                  const Scenario& scenario, const SubproblemConfig& config,
                                  LpBackend& backend, const SlpStart* warm) {
  SecondStageOptions sopt;
  sopt.include_gas = config.include_gas;
  sopt.smoothing = config.slp.smoothing;
  const auto stage = build_second_stage(inst, x, scenario, sopt);

  SlpStart start;
  if (warm != nullptr && static_cast<int>(warm->z.size()) == stage.system.num_variables()) {
    start = *warm;
  } else if (!stage.system.is_linear()) {
    start = steady_state_warm_start(inst, x, stage, config.slp, backend);
  }
  const auto slp = solve_slp(stage.system, config.slp, backend, &start);
  if (slp.z.empty() || !slp.final_lp.optimal()) {
    throw SolverError("second stage for scenario " + scenario.name + " failed: " + slp.message);
  }

  SubproblemResult out;
  out.objective = slp.objective;
  out.recourse = extract_recourse(inst, stage.layout, slp.z);
  out.lambda = fix_link_duals(stage.system, slp.final_lp, inst.num_x());
  out.slp_iterations = slp.iterations;
  out.converged = slp.converged;
  out.max_residual = slp.max_residual;
  out.message = slp.message;
  out.warm.z = slp.z;
  out.warm.basis = slp.basis;
  return out;
}

void parallel_for(int count, int workers, const std::function<void(int)>& task) {
  const int threads = std::clamp(workers, 1, std::max(1, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace gesha

#include "gesha/stage_builders.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gesha/errors.hpp"

namespace gesha {

namespace {

std::string label(const char* base, const std::string& element, int t) {
  return std::string(base) + "[" + element + "," + std::to_string(t + 1) + "]";
}

double power_scale(const Instance& inst) {
  double s = 0.0;
  for (const auto& g : inst.electric.generators) s = std::max(s, g.pmax);
  return std::max(1.0, s);
}

}  // namespace

double gas_flow_scale(const Instance& inst) {
  return std::max(1.0, inst.gas.total_supply_capacity());
}

double gas_pressure_scale(const Instance& inst) {
  double p = 0.0;
  for (const auto& n : inst.gas.nodes) p = std::max(p, n.pmax);
  return std::max(1.0, p);
}

// ---------------------------------------------------------------- first stage

ConstraintSystem build_first_stage(const Instance& inst) {
  ConstraintSystem sys;
  const int steps = inst.num_steps();
  const double hours = inst.time.hours();
  const double scale = power_scale(inst);
  for (const auto& g : inst.electric.generators) {
    for (int t = 0; t < steps; ++t) {
      sys.add_variable(label("x", g.name, t), g.pmin, g.pmax, g.cost * hours, scale);
    }
  }
  for (int g = 0; g < inst.num_generators(); ++g) {
    const auto& gen = inst.electric.generators[g];
    for (int t = 1; t < steps; ++t) {
      sys.add_row(label("ramp", gen.name, t), -gen.ramp, gen.ramp,
                  {{inst.x_index(g, t), 1.0}, {inst.x_index(g, t - 1), -1.0}});
    }
  }
  return sys;
}

double first_stage_cost(const Instance& inst, std::span<const double> x) {
  double cost = 0.0;
  for (int g = 0; g < inst.num_generators(); ++g) {
    for (int t = 0; t < inst.num_steps(); ++t) {
      cost += inst.electric.generators[g].cost * inst.time.hours() * x[inst.x_index(g, t)];
    }
  }
  return cost;
}

bool first_stage_feasible(const Instance& inst, std::span<const double> x, double tol) {
  if (static_cast<int>(x.size()) != inst.num_x()) return false;
  for (int g = 0; g < inst.num_generators(); ++g) {
    const auto& gen = inst.electric.generators[g];
    for (int t = 0; t < inst.num_steps(); ++t) {
      const double v = x[inst.x_index(g, t)];
      if (v < gen.pmin - tol || v > gen.pmax + tol) return false;
      if (t > 0 && std::abs(v - x[inst.x_index(g, t - 1)]) > gen.ramp + tol) return false;
    }
  }
  return true;
}

StageCounts first_stage_counts(const Instance& inst) {
  const int g = inst.num_generators();
  const int t = inst.num_steps();
  return {g * t, g * (t - 1)};
}

// ---------------------------------------------------------------- electric

ElectricIndex build_second_stage_electric(ConstraintSystem& sys, const Instance& inst,
                                          std::span<const double> x, const Grid& wind) {
  const auto& e = inst.electric;
  const int steps = inst.num_steps();
  const int ng = inst.num_generators();
  const int nb = e.num_buses();
  const double hours = inst.time.hours();
  const double pscale = power_scale(inst);
  if (static_cast<int>(x.size()) != inst.num_x()) {
    throw ConfigError("first-stage vector has " + std::to_string(x.size()) + " entries, expected " +
                      std::to_string(inst.num_x()));
  }
  if (wind.size() != e.wind_farms.size()) throw DataError("wind output does not match wind farms");

  ElectricIndex idx;
  auto grid = [steps](std::size_t n) { return std::vector<int>(n * static_cast<std::size_t>(steps)); };
  idx.p = grid(ng);
  idx.p_up = grid(ng);
  idx.p_down = grid(ng);
  idx.spill = grid(e.wind_farms.size());
  idx.shed = grid(nb);
  idx.add = grid(nb);
  idx.theta = grid(nb);
  idx.flow = grid(e.lines.size());
  idx.fix_rows = grid(ng);
  idx.balance_rows = grid(nb);

  for (int g = 0; g < ng; ++g) {
    const auto& gen = e.generators[g];
    for (int t = 0; t < steps; ++t) {
      const int k = g * steps + t;
      idx.p[k] = sys.add_variable(label("p", gen.name, t), -kInf, kInf, 0.0, pscale);
      // At t1 no earlier state exists, so the ramp budget bounds the redispatch directly.
      const double cap = t == 0 ? gen.ramp : kInf;
      idx.p_up[k] = sys.add_variable(label("pup", gen.name, t), 0.0, cap, gen.cost_up * hours, pscale);
      idx.p_down[k] = sys.add_variable(label("pdn", gen.name, t), 0.0, cap, -gen.cost_down * hours, pscale);
    }
  }
  for (std::size_t j = 0; j < e.wind_farms.size(); ++j) {
    for (int t = 0; t < steps; ++t) {
      idx.spill[j * steps + t] = sys.add_variable(label("spill", e.wind_farms[j].name, t), 0.0,
                                                  wind[j][t], 0.0, pscale);
    }
  }
  for (int b = 0; b < nb; ++b) {
    for (int t = 0; t < steps; ++t) {
      const int k = b * steps + t;
      idx.shed[k] = sys.add_variable(label("shed", e.buses[b], t), 0.0, e.load[b][t],
                                     e.voll * hours, pscale);
      idx.add[k] = sys.add_variable(label("add", e.buses[b], t), 0.0, e.load_add_cap[b][t],
                                    e.cost_add * hours, pscale);
      const bool ref = b == e.reference_bus;
      idx.theta[k] = sys.add_variable(label("theta", e.buses[b], t), ref ? 0.0 : -kInf,
                                      ref ? 0.0 : kInf, 0.0, 0.1);
    }
  }
  for (std::size_t l = 0; l < e.lines.size(); ++l) {
    for (int t = 0; t < steps; ++t) {
      idx.flow[l * steps + t] = sys.add_variable(label("f", e.lines[l].name, t), -e.lines[l].limit,
                                                 e.lines[l].limit, 0.0, pscale);
    }
  }

  for (int g = 0; g < ng; ++g) {
    const auto& gen = e.generators[g];
    for (int t = 0; t < steps; ++t) {
      const int k = g * steps + t;
      const double xv = x[inst.x_index(g, t)];
      idx.fix_rows[k] = sys.add_row(label("fix", gen.name, t), xv, xv, {{idx.p[k], 1.0}});
      sys.fix_links().push_back({idx.fix_rows[k], inst.x_index(g, t), -1});
      sys.add_row(label("gen", gen.name, t), gen.pmin, gen.pmax,
                  {{idx.p[k], 1.0}, {idx.p_up[k], 1.0}, {idx.p_down[k], -1.0}});
      if (t > 0) {
        sys.add_row(label("rampup", gen.name, t), -kInf, gen.ramp,
                    {{idx.p_up[k], 1.0}, {idx.p[k], 1.0}, {idx.p[k - 1], -1.0}});
        sys.add_row(label("rampdn", gen.name, t), -kInf, gen.ramp,
                    {{idx.p_down[k], 1.0}, {idx.p[k], -1.0}, {idx.p[k - 1], 1.0}});
      }
    }
  }
  for (std::size_t l = 0; l < e.lines.size(); ++l) {
    const auto& line = e.lines[l];
    const double b = e.base_mva * line.susceptance;
    for (int t = 0; t < steps; ++t) {
      sys.add_row(label("flow", line.name, t), 0.0, 0.0,
                  {{idx.flow[l * steps + t], 1.0},
                   {idx.theta[line.from * steps + t], -b},
                   {idx.theta[line.to * steps + t], b}});
    }
  }
  for (int b = 0; b < nb; ++b) {
    for (int t = 0; t < steps; ++t) {
      double rhs = e.load[b][t];
      for (std::size_t j = 0; j < e.wind_farms.size(); ++j) {
        if (e.wind_farms[j].bus == b) rhs -= wind[j][t];
      }
      const int row = sys.add_row(label("bal", e.buses[b], t), rhs, rhs);
      idx.balance_rows[b * steps + t] = row;
      for (int g = 0; g < ng; ++g) {
        if (e.generators[g].bus != b) continue;
        sys.add_coefficient(row, idx.p[g * steps + t], 1.0);
        sys.add_coefficient(row, idx.p_up[g * steps + t], 1.0);
        sys.add_coefficient(row, idx.p_down[g * steps + t], -1.0);
      }
      for (std::size_t j = 0; j < e.wind_farms.size(); ++j) {
        if (e.wind_farms[j].bus == b) sys.add_coefficient(row, idx.spill[j * steps + t], -1.0);
      }
      sys.add_coefficient(row, idx.shed[b * steps + t], 1.0);
      sys.add_coefficient(row, idx.add[b * steps + t], -1.0);
      for (std::size_t l = 0; l < e.lines.size(); ++l) {
        const int a = e.incidence(static_cast<int>(l), b);
        if (a != 0) sys.add_coefficient(row, idx.flow[l * steps + t], -a);
      }
    }
  }
  return idx;
}

// ---------------------------------------------------------------- gas

GasIndex build_second_stage_gas(ConstraintSystem& sys, const Instance& inst, const GasOptions& opt) {
  if (!inst.has_gas()) throw ConfigError("instance has no gas network");
  const auto& d = inst.discretized;
  const auto& gas = inst.gas;
  const int steps = inst.num_steps();
  const double dt = inst.time.dt;
  const double m0 = gas_flow_scale(inst);
  const double p0 = gas_pressure_scale(inst);
  const int nsp = static_cast<int>(d.subpipes.size());
  const int nn = d.num_nodes();
  const int nc = static_cast<int>(gas.compressors.size());
  const int ns = static_cast<int>(gas.supplies.size());
  const int nk = static_cast<int>(inst.coupling.gfpps.size());
  const double smoothing = opt.smoothing * m0 * m0;

  GasIndex idx;
  auto grid = [steps](int n) { return std::vector<int>(static_cast<std::size_t>(n * steps)); };
  idx.m_in = grid(nsp);
  idx.m_out = grid(nsp);
  idx.m_avg = grid(nsp);
  idx.pi_avg = grid(nsp);
  idx.pi = grid(nn);
  idx.shed = grid(nn);
  idx.kappa = grid(nc);
  idx.mc = grid(nc);
  idx.supply = grid(ns);
  idx.gfpp_demand = grid(nk);
  idx.balance_rows = grid(nn);
  idx.continuity_rows = grid(nsp);
  idx.momentum_rows = grid(nsp);
  idx.compressor_rows = grid(nc);

  for (int s = 0; s < nsp; ++s) {
    const std::string name = "sp" + std::to_string(s + 1);
    for (int t = 0; t < steps; ++t) {
      const int k = s * steps + t;
      idx.m_in[k] = sys.add_variable(label("min", name, t), -kInf, kInf, 0.0, m0);
      idx.m_out[k] = sys.add_variable(label("mout", name, t), -kInf, kInf, 0.0, m0);
      idx.m_avg[k] = sys.add_variable(label("mavg", name, t), -kInf, kInf, 0.0, m0);
      idx.pi_avg[k] = sys.add_variable(label("piavg", name, t), 0.0, kInf, 0.0, p0);
    }
  }
  for (int n = 0; n < nn; ++n) {
    const bool slack = n == gas.slack_node;
    for (int t = 0; t < steps; ++t) {
      const int k = n * steps + t;
      idx.pi[k] = sys.add_variable(label("pi", d.node_names[n], t),
                                   slack ? gas.slack_pressure : d.pmin[n],
                                   slack ? gas.slack_pressure : d.pmax[n], 0.0, p0);
      idx.shed[k] = sys.add_variable(label("gshed", d.node_names[n], t), 0.0, d.demand(n, t),
                                     gas.shed_cost * dt, m0);
    }
  }
  for (int c = 0; c < nc; ++c) {
    const auto& comp = gas.compressors[c];
    const double lo = std::isnan(comp.flow_min) ? -gas.total_supply_capacity() : comp.flow_min;
    const double hi = std::isnan(comp.flow_max) ? gas.total_supply_capacity() : comp.flow_max;
    for (int t = 0; t < steps; ++t) {
      const int k = c * steps + t;
      idx.kappa[k] = sys.add_variable(label("kappa", comp.name, t), comp.ratio_min, comp.ratio_max,
                                      comp.cost, 1.0);
      idx.mc[k] = sys.add_variable(label("mc", comp.name, t), lo, hi, 0.0, m0);
    }
  }
  for (int s = 0; s < ns; ++s) {
    const auto& sup = gas.supplies[s];
    for (int t = 0; t < steps; ++t) {
      idx.supply[s * steps + t] =
          sys.add_variable(label("s", sup.name, t), sup.smin, sup.smax, sup.cost * dt, m0);
    }
  }
  for (int k = 0; k < nk; ++k) {
    const auto& gen = inst.electric.generators[inst.coupling.gfpps[k].generator];
    for (int t = 0; t < steps; ++t) {
      double lo = 0.0;
      double hi = kInf;
      if (opt.fixed_gfpp_demand != nullptr) lo = hi = (*opt.fixed_gfpp_demand)[k][t];
      idx.gfpp_demand[k * steps + t] = sys.add_variable(label("dg", gen.name, t), lo, hi, 0.0, m0);
    }
  }

  // Subpipe averages, continuity and momentum.
  for (int s = 0; s < nsp; ++s) {
    const auto& sp = d.subpipes[s];
    const std::string name = "sp" + std::to_string(s + 1);
    const double c_cont = sp.dx / (sp.constants.vm * dt);
    const double c_mom = sp.dx / (sp.constants.vp * dt);
    const double k_fric = sp.dx * sp.constants.vf / sp.constants.vp;
    for (int t = 0; t < steps; ++t) {
      const int k = s * steps + t;
      const double u = inst.time.steady_flag(t);
      sys.add_row(label("mavg", name, t), 0.0, 0.0,
                  {{idx.m_avg[k], 1.0}, {idx.m_in[k], -0.5}, {idx.m_out[k], -0.5}});
      sys.add_row(label("piavg", name, t), 0.0, 0.0,
                  {{idx.pi_avg[k], 1.0}, {idx.pi[sp.from * steps + t], -0.5}, {idx.pi[sp.to * steps + t], -0.5}});
      std::vector<Entry> cont = {{idx.m_out[k], 1.0}, {idx.m_in[k], -1.0}};
      std::vector<Entry> mom = {{idx.pi[sp.to * steps + t], 1.0}, {idx.pi[sp.from * steps + t], -1.0}};
      if (u != 0.0) {
        cont.push_back({idx.pi_avg[k], u * c_cont});
        cont.push_back({idx.pi_avg[k - 1], -u * c_cont});
        mom.push_back({idx.m_avg[k], u * c_mom});
        mom.push_back({idx.m_avg[k - 1], -u * c_mom});
      }
      idx.continuity_rows[k] = sys.add_row(label("cont", name, t), 0.0, 0.0, std::move(cont));
      idx.momentum_rows[k] = sys.add_row(label("mom", name, t), 0.0, 0.0, std::move(mom));
      if (k_fric != 0.0) {
        NonlinearTerm term;
        term.row = idx.momentum_rows[k];
        term.kind = NonlinearKind::kFriction;
        term.first = idx.m_avg[k];
        term.second = idx.pi_avg[k];
        term.coef = k_fric;
        term.smoothing = smoothing;
        term.residual_scale = p0;
        sys.add_nonlinear(term);
      }
    }
  }

  // Compressors: pi_to - kappa pi_from = 0.
  for (int c = 0; c < nc; ++c) {
    const auto& comp = gas.compressors[c];
    for (int t = 0; t < steps; ++t) {
      const int k = c * steps + t;
      idx.compressor_rows[k] = sys.add_row(label("comp", comp.name, t), 0.0, 0.0,
                                           {{idx.pi[comp.to * steps + t], 1.0}});
      NonlinearTerm term;
      term.row = idx.compressor_rows[k];
      term.kind = NonlinearKind::kBilinear;
      term.first = idx.kappa[k];
      term.second = idx.pi[comp.from * steps + t];
      term.coef = -1.0;
      term.residual_scale = p0;
      sys.add_nonlinear(term);
    }
  }

  // Nodal mass balance: inflow - outflow + shed - GFPP use = D.
  std::vector<std::vector<int>> gfpp_at(static_cast<std::size_t>(nn));
  for (int k = 0; k < nk; ++k) gfpp_at[inst.coupling.gfpps[k].gas_node].push_back(k);
  for (int n = 0; n < nn; ++n) {
    for (int t = 0; t < steps; ++t) {
      const double dem = d.demand(n, t);
      const int row = sys.add_row(label("gbal", d.node_names[n], t), dem, dem);
      idx.balance_rows[n * steps + t] = row;
      for (int s : d.supplies_at[n]) sys.add_coefficient(row, idx.supply[s * steps + t], 1.0);
      for (int s : d.subpipe_inlets[n]) sys.add_coefficient(row, idx.m_in[s * steps + t], -1.0);
      for (int s : d.subpipe_outlets[n]) sys.add_coefficient(row, idx.m_out[s * steps + t], 1.0);
      for (int c : d.compressors_from[n]) sys.add_coefficient(row, idx.mc[c * steps + t], -1.0);
      for (int c : d.compressors_to[n]) sys.add_coefficient(row, idx.mc[c * steps + t], 1.0);
      sys.add_coefficient(row, idx.shed[n * steps + t], 1.0);
      for (int k : gfpp_at[n]) sys.add_coefficient(row, idx.gfpp_demand[k * steps + t], -1.0);
    }
  }

  // Linepack: supply over the horizon balances served demand.
  double total_demand = 0.0;
  for (int n = 0; n < nn; ++n) {
    for (int t = 0; t < steps; ++t) total_demand += d.demand(n, t);
  }
  idx.linepack_row = sys.add_row("linepack", total_demand, total_demand);
  for (int v : idx.supply) sys.add_coefficient(idx.linepack_row, v, 1.0);
  for (int v : idx.shed) {
    if (sys.variables()[v].upper > 0.0) sys.add_coefficient(idx.linepack_row, v, 1.0);
  }
  for (int v : idx.gfpp_demand) sys.add_coefficient(idx.linepack_row, v, -1.0);
  return idx;
}

// ---------------------------------------------------------------- coupling

std::vector<int> build_coupling(ConstraintSystem& sys, const Instance& inst,
                                const ElectricIndex& e, const GasIndex& gas) {
  const int steps = inst.num_steps();
  const double hours = inst.time.hours();
  std::vector<int> rows;
  for (std::size_t k = 0; k < inst.coupling.gfpps.size(); ++k) {
    const auto& link = inst.coupling.gfpps[k];
    if (link.gas_node < 0 || link.gas_node >= inst.discretized.num_original_nodes) {
      throw DataError("gas-fired generator " + inst.electric.generators.at(link.generator).name +
                      " has no gas node");
    }
    const auto& gen = inst.electric.generators[link.generator];
    const double eta = heat_rate_si(link.heat_rate);
    for (int t = 0; t < steps; ++t) {
      const int ek = link.generator * steps + t;
      const int dk = static_cast<int>(k) * steps + t;
      rows.push_back(sys.add_row(label("heat", gen.name, t), 0.0, 0.0,
                                 {{gas.gfpp_demand[dk], 1.0},
                                  {e.p[ek], -eta},
                                  {e.p_up[ek], -eta},
                                  {e.p_down[ek], eta}}));
      sys.variables()[gas.gfpp_demand[dk]].cost += -gen.cost * hours / eta;
    }
  }
  return rows;
}

SecondStage build_second_stage(const Instance& inst, std::span<const double> x,
                               const Scenario& scenario, const SecondStageOptions& opt) {
  SecondStage out;
  out.layout.electric =
      build_second_stage_electric(out.system, inst, x, wind_output(inst.electric, scenario));
  if (opt.include_gas && inst.has_gas()) {
    out.layout.has_gas = true;
    GasOptions gopt;
    gopt.smoothing = opt.smoothing;
    out.layout.gas = build_second_stage_gas(out.system, inst, gopt);
    out.layout.coupling_rows = build_coupling(out.system, inst, out.layout.electric, out.layout.gas);
  }
  return out;
}

StageCounts second_stage_counts(const Instance& inst, bool include_gas) {
  const auto& e = inst.electric;
  const int steps = inst.num_steps();
  const int ng = inst.num_generators();
  const int nb = e.num_buses();
  const int nl = static_cast<int>(e.lines.size());
  const int nw = static_cast<int>(e.wind_farms.size());
  StageCounts c;
  c.variables = steps * (3 * ng + nw + 3 * nb + nl);
  c.rows = steps * (2 * ng + nl + nb) + 2 * ng * (steps - 1);
  if (include_gas && inst.has_gas()) {
    const auto& d = inst.discretized;
    const int nsp = static_cast<int>(d.subpipes.size());
    const int nn = d.num_nodes();
    const int nc = static_cast<int>(inst.gas.compressors.size());
    const int ns = static_cast<int>(inst.gas.supplies.size());
    const int nk = static_cast<int>(inst.coupling.gfpps.size());
    c.variables += steps * (4 * nsp + 2 * nn + 2 * nc + ns + nk);
    c.rows += steps * (4 * nsp + nc + nn + nk) + 1;
  }
  return c;
}

// ---------------------------------------------------------------- extraction

namespace {

Grid gather(const std::vector<int>& cols, int steps, std::span<const double> z) {
  Grid g;
  if (steps == 0) return g;
  const std::size_t n = cols.size() / static_cast<std::size_t>(steps);
  g.assign(n, std::vector<double>(static_cast<std::size_t>(steps)));
  for (std::size_t i = 0; i < n; ++i) {
    for (int t = 0; t < steps; ++t) g[i][t] = z[static_cast<std::size_t>(cols[i * steps + t])];
  }
  return g;
}

}  // namespace

RecourseSolution extract_recourse(const Instance& inst, const SecondStageLayout& layout,
                                  std::span<const double> z) {
  const int steps = inst.num_steps();
  const double hours = inst.time.hours();
  const auto& e = layout.electric;
  RecourseSolution r;
  r.p = gather(e.p, steps, z);
  r.p_up = gather(e.p_up, steps, z);
  r.p_down = gather(e.p_down, steps, z);
  r.spill = gather(e.spill, steps, z);
  r.shed = gather(e.shed, steps, z);
  r.add = gather(e.add, steps, z);
  r.flow = gather(e.flow, steps, z);
  r.theta = gather(e.theta, steps, z);
  const auto& el = inst.electric;
  for (int g = 0; g < inst.num_generators(); ++g) {
    for (int t = 0; t < steps; ++t) {
      r.h_elec += hours * (el.generators[g].cost_up * r.p_up[g][t] -
                           el.generators[g].cost_down * r.p_down[g][t]);
    }
  }
  for (int b = 0; b < el.num_buses(); ++b) {
    for (int t = 0; t < steps; ++t) {
      r.h_elec += hours * (el.voll * r.shed[b][t] + el.cost_add * r.add[b][t]);
    }
  }
  if (!layout.has_gas) return r;
  const auto& g = layout.gas;
  const auto& gas = inst.gas;
  const double dt = inst.time.dt;
  r.supply = gather(g.supply, steps, z);
  r.kappa = gather(g.kappa, steps, z);
  r.m_in = gather(g.m_in, steps, z);
  r.m_out = gather(g.m_out, steps, z);
  r.m_avg = gather(g.m_avg, steps, z);
  r.pi_avg = gather(g.pi_avg, steps, z);
  r.pi = gather(g.pi, steps, z);
  r.gfpp_demand = gather(g.gfpp_demand, steps, z);
  r.gas_shed = gather(g.shed, steps, z);
  r.mc = gather(g.mc, steps, z);
  for (int t = 0; t < steps; ++t) {
    for (std::size_t s = 0; s < gas.supplies.size(); ++s) r.h_gas += gas.supplies[s].cost * dt * r.supply[s][t];
    for (std::size_t c = 0; c < gas.compressors.size(); ++c) r.h_gas += gas.compressors[c].cost * r.kappa[c][t];
    for (const auto& row : r.gas_shed) r.h_gas += gas.shed_cost * dt * row[t];
    for (std::size_t k = 0; k < inst.coupling.gfpps.size(); ++k) {
      const auto& link = inst.coupling.gfpps[k];
      r.correction += el.generators[link.generator].cost * hours * r.gfpp_demand[k][t] /
                      heat_rate_si(link.heat_rate);
    }
  }
  return r;
}

}  // namespace gesha

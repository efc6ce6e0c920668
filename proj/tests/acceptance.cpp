// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Heavy shared results (stressed desk runs) are computed once.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "gesha/benchmarks.hpp"
#include "gesha/cli.hpp"
#include "gesha/errors.hpp"
#include "gesha/evaluator.hpp"
#include "gesha/lp_backend.hpp"
#include "gesha/sha_engine.hpp"
#include "gesha/stage_builders.hpp"
#include "gesha/subproblem.hpp"

namespace fs = std::filesystem;
using namespace gesha;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Shared micro artifacts.

struct Micro {
  Instance inst = fixture::micro();
  ScenarioSet set = fixture::micro_scenarios();
  OneShotResult os;
  double v_os_train = 0.0, v_os_test = 0.0;
  EvaluationReport os_train;
  Micro() {
    os = solve_one_shot(inst, set.training_set());
    os_train = evaluate(inst, os.x, set.training_set());
    v_os_train = os_train.value;
    EvaluateOptions o;
    o.out_of_sample = true;
    v_os_test = evaluate(inst, os.x, set.testing_set(), o).value;
  }
};

Micro& micro() {
  static Micro m;
  return m;
}

struct VariantRun {
  ShaVariant variant;
  ShaResult result;
  double v_train = 0.0, v_test = 0.0;
};

std::vector<VariantRun>& variant_runs() {
  static std::vector<VariantRun> runs = [] {
    auto& m = micro();
    std::vector<VariantRun> out;
    for (auto v : {ShaVariant::kConvex, ShaVariant::kCertaintyEquivalent, ShaVariant::kExtremaEquivalent}) {
      ShaConfig cfg;
      cfg.variant = v;
      cfg.max_iterations = 500;
      VariantRun r{v, run_sha(m.inst, m.set, cfg)};
      r.v_train = evaluate(m.inst, r.result.x_bar, m.set.training_set()).value;
      EvaluateOptions o;
      o.out_of_sample = true;
      r.v_test = evaluate(m.inst, r.result.x_bar, m.set.testing_set(), o).value;
      out.push_back(std::move(r));
    }
    return out;
  }();
  return runs;
}

// ---------------------------------------------------------------------------
// Shared stressed desk artifacts.

struct Desk {
  Instance inst = apply_cost_stress(fixture::desk(), {0.25, 2.0});
  ScenarioSet set = fixture::desk_scenarios();
  OneShotResult opf;
  ShaResult sha;
  EvaluationReport eval_opf, eval_sha;
  double wall_opf = 0.0, wall_sha = 0.0;
  Desk() {
    auto t0 = std::chrono::steady_clock::now();
    opf = solve_opf_only(inst, set.training_set());
    wall_opf = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    ShaConfig cfg;  // SHACE with the default settings
    sha = run_sha(inst, set, cfg);
    wall_sha = seconds_since(t0);
    eval_opf = evaluate(inst, opf.x, set.training_set());
    eval_sha = evaluate(inst, sha.x_bar, set.training_set());
  }
};

Desk& desk() {
  static Desk d;
  return d;
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  auto& m = micro();
  bool ok = m.os.converged;
  std::string d = "V(x_OS)=" + fmt("%.2f", m.v_os_train);
  for (const auto& r : variant_runs()) {
    const double ratio = r.v_train / m.v_os_train;
    ok = ok && ratio <= 1.01 && r.result.iterations <= 500;
    d += std::string("; ") + std::string(to_string(r.variant)) + " ratio " + fmt("%.5f", ratio) + " after " +
         std::to_string(r.result.iterations) + " it";
  }
  return {ok, d};
}

Outcome criterion2() {
  auto& m = micro();
  bool ok = true;
  std::string d = "testing V(x_OS)=" + fmt("%.2f", m.v_os_test);
  for (const auto& r : variant_runs()) {
    const double ratio = r.v_test / m.v_os_test;
    ok = ok && ratio <= 1.02;
    d += std::string("; ") + std::string(to_string(r.variant)) + " ratio " + fmt("%.5f", ratio);
  }
  return {ok, d};
}

Outcome criterion3() {
  auto& m = micro();
  const auto& inst = m.inst;
  auto backend = make_revised_simplex();
  // Interior, ramp-feasible point: every unit at mid range in every step.
  std::vector<double> x(static_cast<std::size_t>(inst.num_x()));
  for (int g = 0; g < inst.num_generators(); ++g) {
    const auto& gen = inst.electric.generators[g];
    for (int t = 0; t < inst.num_steps(); ++t) x[inst.x_index(g, t)] = 0.5 * (gen.pmin + gen.pmax);
  }
  int checked = 0, matched = 0, degenerate = 0, failed = 0;
  double worst = 0.0;
  for (const auto& sc : m.set.scenarios) {
    const auto base = solve_subproblem(inst, x, sc, SubproblemConfig{}, *backend);
    auto g_at = [&](int i, double step) {
      auto xp = x;
      xp[i] += step;
      auto start = base.warm;
      const auto r = solve_subproblem(inst, xp, sc, SubproblemConfig{}, *backend, &start);
      if (!r.converged) ++failed;
      return r.objective;
    };
    for (int g = 0; g < inst.num_generators(); ++g) {
      const double delta = 1e-4 * inst.electric.generators[g].pmax;
      for (int t = 0; t < inst.num_steps(); ++t) {
        const int i = inst.x_index(g, t);
        const double up = g_at(i, delta), down = g_at(i, -delta);
        const double fwd = (up - base.objective) / delta;
        const double bwd = (base.objective - down) / delta;
        const double scale = std::max({std::abs(fwd), std::abs(bwd), 1.0});
        // One-sided slopes that disagree mark a kink of g in this coordinate.
        if (std::abs(fwd - bwd) > 1e-3 * scale) {
          ++degenerate;
          continue;
        }
        const double central = (up - down) / (2.0 * delta);
        const double err = std::abs(base.lambda[i] - central) / std::max(std::abs(central), 1.0);
        ++checked;
        if (err <= 1e-3) ++matched;
        worst = std::max(worst, err);
      }
    }
  }
  const double share = checked > 0 ? static_cast<double>(matched) / checked : 0.0;
  return {checked > 0 && share >= 0.9 && failed == 0,
          std::to_string(matched) + "/" + std::to_string(checked) + " indices within 1e-3 (" +
              fmt("%.1f%%", 100.0 * share) + "), " + std::to_string(degenerate) + " kinks skipped, worst " +
              fmt("%.2e", worst) + ", unconverged solves " + std::to_string(failed)};
}

bool close(double a, double b, double ulps = 4.0) {
  return std::abs(a - b) <= ulps * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
}

Outcome criterion4() {
  std::vector<std::string> bad;
  auto expect = [&](bool c, const char* what) {
    if (!c) bad.emplace_back(what);
  };
  expect(step_size(1, 1.0) == 1.0, "step 1,1");
  expect(step_size(4, 1.0) == 0.25, "step 1,4");
  expect(step_size(2, 2.0) == 1.0, "step 2,2");
  const std::vector<double> zero{0.0};
  expect(sha_update(zero, std::vector<double>{5.0}, std::vector<double>{3.0}, 1.0)[0] == 2.0, "update first");
  {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    bool fixed = true;
    for (int k = 0; k < 1000; ++k) {
      const std::vector<double> lb{u(rng)}, q0{u(rng)};
      const std::vector<double> lambda{q0[0] + lb[0]};
      const auto next = sha_update(lb, lambda, q0, 1.0 / (1 + k));
      fixed = fixed && close(next[0], lb[0], 64.0 * std::max(1.0, std::abs(q0[0] / lb[0])));
    }
    expect(fixed, "update fixed point");
  }
  expect(sha_update(std::vector<double>{2.0}, std::vector<double>{4.0}, std::vector<double>{1.0}, 0.5)[0] == 2.5,
         "update 2.5");
  expect(calibrate_b(1000.0, std::vector<double>{0.5}, std::vector<double>{30.0})[0] == -970.0, "b -970");
  expect(calibrate_b(0.0, std::vector<double>{0.5}, std::vector<double>{30.0})[0] == 30.0, "b limit");
  const std::vector<std::vector<double>> xs{{1.0}, {2.0}, {3.0}};
  const std::vector<double> al{step_size(1, 1.0), step_size(2, 1.0), step_size(3, 1.0)};
  expect(weighted_average(xs, al, Window::fixed(1))[0] == 3.0, "window 1");
  expect(close(weighted_average(xs, al, Window::infinite())[0], 7.0 / 3.0), "window inf 7/3");
  {
    const std::vector<std::vector<double>> flat(9, std::vector<double>{0.3});
    std::vector<double> a9;
    for (int nu = 1; nu <= 9; ++nu) a9.push_back(step_size(nu, 1.0));
    bool same = true;
    for (const auto& w : {Window::fixed(1), Window::fixed(4), Window::infinite(), Window::half()}) {
      same = same && close(weighted_average(flat, a9, w)[0], 0.3);
    }
    expect(same, "constant sequence");
  }
  expect(solution_update_metric(std::vector<double>{2.0, 0.0}, std::vector<double>{2.0, 0.0}) == 0.0, "delta 0");
  expect(solution_update_metric(std::vector<double>{2.0, 0.0}, std::vector<double>{1.0, 0.0}) == 0.5, "delta 0.5");
  {
    const std::vector<double> a{1.3, -0.7, 2.2}, b{1.1, -0.9, 2.5};
    bool homog = true;
    for (double c : {0.001, 3.0, 1e6}) {
      const std::vector<double> ca{c * a[0], c * a[1], c * a[2]}, cb{c * b[0], c * b[1], c * b[2]};
      homog = homog && close(solution_update_metric(ca, cb), solution_update_metric(a, b), 8.0);
    }
    expect(homog, "delta homogeneity");
  }
  std::string d = "all examples hold";
  if (!bad.empty()) {
    d = "failed:";
    for (const auto& b : bad) d += " [" + b + "]";
  }
  return {bad.empty(), d};
}

// Constant boundary data: loads and gas demands frozen at step 1, supplies
// pinned to a capacity-proportional share of the demand, GFPPs decoupled.
Instance frozen(const Instance& src) {
  Instance inst = src;
  for (auto& row : inst.electric.load) row.assign(row.size(), row.front());
  for (auto& row : inst.gas.demand) row.assign(row.size(), row.front());
  inst.coupling.gfpps.clear();
  double demand = 0.0, cap = 0.0;
  for (const auto& row : inst.gas.demand) demand += row.front();
  for (const auto& s : inst.gas.supplies) cap += s.smax;
  for (auto& s : inst.gas.supplies) s.smin = s.smax = demand * s.smax / cap;
  inst.finalize();
  return inst;
}

std::vector<double> constant_dispatch(const Instance& inst) {
  std::vector<double> x(static_cast<std::size_t>(inst.num_x()));
  for (int g = 0; g < inst.num_generators(); ++g) {
    const auto& gen = inst.electric.generators[g];
    for (int t = 0; t < inst.num_steps(); ++t) x[inst.x_index(g, t)] = 0.5 * (gen.pmin + gen.pmax);
  }
  return x;
}

// Largest deviation from step 1 over the pressure and flow grids, scaled.
double steady_deviation(const Instance& inst, const SecondStageLayout& layout, const std::vector<double>& z) {
  const auto& g = layout.gas;
  const int T = inst.num_steps();
  const double ps = gas_pressure_scale(inst), fs_ = gas_flow_scale(inst);
  double dev = 0.0;
  for (int n = 0; n < inst.discretized.num_nodes(); ++n) {
    for (int t = 1; t < T; ++t) dev = std::max(dev, std::abs(z[g.pi[n * T + t]] - z[g.pi[n * T]]) / ps);
  }
  for (std::size_t sp = 0; sp < inst.discretized.subpipes.size(); ++sp) {
    for (int t = 1; t < T; ++t) {
      dev = std::max(dev, std::abs(z[g.m_in[sp * T + t]] - z[g.m_in[sp * T]]) / fs_);
      dev = std::max(dev, std::abs(z[g.m_out[sp * T + t]] - z[g.m_out[sp * T]]) / fs_);
    }
  }
  return dev;
}

// Per step: supply - demand + shed - GFPP offtake against the subpipe linepack rate.
double conservation_gap(const Instance& inst, const SecondStageLayout& layout, const std::vector<double>& z) {
  const auto& g = layout.gas;
  const auto& d = inst.discretized;
  const int T = inst.num_steps();
  double worst = 0.0;
  for (int t = 0; t < T; ++t) {
    double injection = 0.0;
    for (std::size_t k = 0; k < inst.gas.supplies.size(); ++k) injection += z[g.supply[k * T + t]];
    for (int n = 0; n < d.num_nodes(); ++n) injection += z[g.shed[n * T + t]] - d.demand(n, t);
    for (std::size_t k = 0; k < inst.coupling.gfpps.size(); ++k) injection -= z[g.gfpp_demand[k * T + t]];
    double pack = 0.0;
    if (t > 0) {
      for (std::size_t sp = 0; sp < d.subpipes.size(); ++sp) {
        const auto& sub = d.subpipes[sp];
        pack += sub.dx / (sub.constants.vm * inst.time.dt) *
                (z[g.pi_avg[sp * T + t]] - z[g.pi_avg[sp * T + t - 1]]);
      }
    }
    worst = std::max(worst, std::abs(injection - pack) / gas_flow_scale(inst));
  }
  return worst;
}

Outcome criterion5() {
  auto backend = make_revised_simplex();
  std::string d;
  bool ok = true;

  // (a) steady-boundary invariance
  double steady = 0.0;
  for (const auto& base : {fixture::micro(), fixture::desk()}) {
    const auto inst = frozen(base);
    const auto x = constant_dispatch(inst);
    const auto sc = fixture::flat_scenario("flat", inst.num_steps(), 0.5);
    Scenario wind{"flat", std::vector<std::vector<double>>(inst.electric.wind_farms.size(), sc.factor[0])};
    const auto r = solve_subproblem(inst, x, wind, SubproblemConfig{}, *backend);
    const auto st = build_second_stage(inst, x, wind);
    ok = ok && r.converged;
    steady = std::max(steady, steady_deviation(inst, st.layout, r.warm.z));
  }
  ok = ok && steady <= 1e-6;
  d += "(a) max scaled drift " + fmt("%.2e", steady);

  // (b) conservation on solved coupled subproblems
  double cons = 0.0;
  {
    auto& m = micro();
    for (const auto& sc : m.set.scenarios) {
      const auto r = solve_subproblem(m.inst, m.os.x, sc, SubproblemConfig{}, *backend);
      cons = std::max(cons, conservation_gap(m.inst, build_second_stage(m.inst, m.os.x, sc).layout, r.warm.z));
    }
    auto& k = desk();
    for (int s : {0, 5, 11}) {
      const auto& sc = k.set.scenarios[s];
      const auto r = solve_subproblem(k.inst, k.sha.x_bar, sc, SubproblemConfig{}, *backend);
      cons = std::max(cons, conservation_gap(k.inst, build_second_stage(k.inst, k.sha.x_bar, sc).layout, r.warm.z));
    }
  }
  ok = ok && cons <= 1e-8;
  d += "; (b) max scaled imbalance " + fmt("%.2e", cons);

  // (c) nonlinear residuals at reported solutions
  double res = micro().os.max_residual;
  int unconverged = 0, reported = 1;
  auto scan = [&](const EvaluationReport& r) {
    for (const auto& s : r.scenarios) {
      ++reported;
      res = std::max(res, s.max_residual);
      if (!s.converged || s.failed) ++unconverged;
    }
  };
  scan(micro().os_train);
  scan(desk().eval_opf);
  scan(desk().eval_sha);
  ok = ok && res <= 1e-6 && unconverged == 0;
  d += "; (c) max residual " + fmt("%.2e", res) + " over " + std::to_string(reported) + " solutions, " +
       std::to_string(unconverged) + " unconverged";
  return {ok, d};
}

Outcome criterion6() {
  bool ok = true;
  std::string d;
  for (const auto& [name, base, set] :
       {std::tuple{"micro", fixture::micro(), fixture::micro_scenarios()},
        std::tuple{"desk", fixture::desk(), fixture::desk_scenarios()}}) {
    const auto inst = without_gas(base);
    const auto training = set.training_set();
    SubproblemConfig lp;
    lp.include_gas = false;
    const auto os = solve_one_shot(inst, training, lp);
    BendersConfig cfg;
    cfg.subproblem = lp;
    const auto r = run_benders(inst, training, cfg);
    EvaluateOptions eo;
    eo.subproblem = lp;
    const double ratio = evaluate(inst, r.x, training, eo).value / os.objective;
    ok = ok && r.gap() <= 0.01 && ratio <= 1.01;
    if (!d.empty()) d += "; ";
    d += std::string(name) + ": gap " + fmt("%.3f%%", 100.0 * r.gap()) + " after " + std::to_string(r.iterations) +
         " it (" + r.stop_reason + "), ratio " + fmt("%.5f", ratio);
  }
  return {ok, d};
}

Outcome criterion7() {
  auto& m = micro();
  struct Curve {
    std::string label;
    double terminal = 0.0, variance = 0.0;
  };
  std::vector<Curve> curves;
  for (const auto& w : {Window::fixed(1), Window::fixed(100), Window::infinite(), Window::half()}) {
    ShaConfig cfg;
    cfg.window = w;
    cfg.max_iterations = cfg.min_iterations = 500;
    const auto r = run_sha(m.inst, m.set, cfg);
    std::vector<double> deltas;
    for (const auto& h : r.history) {
      if (std::isfinite(h.delta)) deltas.push_back(h.delta);
    }
    const std::size_t tail = std::max<std::size_t>(1, deltas.size() / 10);
    double term = 0.0;
    for (std::size_t k = deltas.size() - tail; k < deltas.size(); ++k) term += deltas[k];
    term /= static_cast<double>(tail);
    double mean = 0.0, var = 0.0;
    for (double v : deltas) mean += v;
    mean /= static_cast<double>(deltas.size());
    for (double v : deltas) var += (v - mean) * (v - mean);
    var /= static_cast<double>(deltas.size() - 1);
    curves.push_back({w.label(), term, var});
  }
  // Order: 1, 100, inf, half.
  bool ok = true;
  for (int k : {0, 1, 3}) ok = ok && curves[2].terminal < curves[k].terminal;
  for (int k : {1, 2, 3}) ok = ok && curves[0].variance > curves[k].variance;
  std::string d;
  for (const auto& c : curves) {
    if (!d.empty()) d += "; ";
    d += "n=" + c.label + " terminal " + fmt("%.2e", c.terminal) + " var " + fmt("%.2e", c.variance);
  }
  return {ok, d};
}

Outcome criterion8() {
  auto& k = desk();
  const double opf_gas = k.eval_opf.gas_shed_pct.mean;
  const double sha_gas = k.eval_sha.gas_shed_pct.mean;
  const double sha_load = k.eval_sha.load_shed_pct.mean;
  const bool ok = opf_gas > 0.0 && sha_gas <= 0.1 && sha_load <= 1.0;
  return {ok, "x_OPF gas shed " + fmt("%.3f%%", opf_gas) + " (" + fmt("%.1f s", k.wall_opf) + "); SHACE gas shed " +
                  fmt("%.4f%%", sha_gas) + ", load shed " + fmt("%.4f%%", sha_load) + " after " +
                  std::to_string(k.sha.iterations) + " it (" + fmt("%.1f s", k.wall_sha) + ")"};
}

Outcome criterion9() {
  auto& m = micro();
  auto backend = make_revised_simplex();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(m.set.scenarios.size()) - 1);
  int infeasible = 0, unconverged = 0, with_shed = 0;
  for (int k = 0; k < 100; ++k) {
    const auto x = fixture::random_dispatch(m.inst, rng);
    const auto& sc = m.set.scenarios[pick(rng)];
    try {
      const auto r = solve_subproblem(m.inst, x, sc, SubproblemConfig{}, *backend);
      if (!r.converged || r.max_residual > 1e-6) ++unconverged;
      double shed = 0.0;
      for (const auto* grid : {&r.recourse.shed, &r.recourse.gas_shed}) {
        for (const auto& row : *grid) {
          for (double v : row) shed += v;
        }
      }
      if (shed > 1e-9) ++with_shed;
    } catch (const SolverError&) {
      ++infeasible;
    }
  }
  return {infeasible == 0 && unconverged == 0,
          "100 samples: " + std::to_string(infeasible) + " infeasible, " + std::to_string(unconverged) +
              " unconverged, " + std::to_string(with_shed) + " with shedding"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion10() {
  const auto root = fs::temp_directory_path() / "gesha_acceptance_determinism";
  fs::remove_all(root);
  bool ok = true;
  std::string d;
  for (const std::string alg : {"shacv", "shace", "shaxe", "benders", "oneshot"}) {
    std::string files[2][2];
    for (int run = 0; run < 2; ++run) {
      const auto out = root / (alg + std::to_string(run));
      std::vector<std::string> args{"gesha", "solve", "--algorithm", alg, "--instance",
                                    fixture::data_path("micro/instance.json"), "--scenarios",
                                    fixture::data_path("micro/scenarios.csv"), "--max-iter", "60",
                                    "--benders-max-iter", "15", "--seed", "7", "--out", out.string()};
      std::ostringstream sink;
      if (run_cli(args, sink, sink) != kExitOk) ok = false;
      files[run][0] = slurp(out / "solution.csv");
      files[run][1] = slurp(out / "history.csv");
    }
    const bool same = !files[0][0].empty() && !files[0][1].empty() && files[0][0] == files[1][0] &&
                      files[0][1] == files[1][1];
    ok = ok && same;
    if (!d.empty()) d += "; ";
    d += alg + (same ? " identical" : " DIFFERENT");
  }
  fs::remove_all(root);
  return {ok, d};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"oracle equivalence on micro (training, ratio <= 1.01)", criterion1},
      {"out-of-sample consistency (testing, ratio <= 1.02)", criterion2},
      {"duals against central differences (>= 90% within 1e-3)", criterion3},
      {"update algebra examples", criterion4},
      {"gas physics: steady invariance, conservation, residuals", criterion5},
      {"Benders on gas-free instances (gap and ratio <= 1%)", criterion6},
      {"window-length ordering", criterion7},
      {"OPF versus OPGF on stressed desk", criterion8},
      {"relative complete recourse on random x", criterion9},
      {"byte-identical repeated runs", criterion10},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %2zu: %s | %s | %.1f s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

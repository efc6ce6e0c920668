#include "gesha/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>
#include <ostream>
#include <sstream>

#include "gesha/benchmarks.hpp"
#include "gesha/errors.hpp"
#include "gesha/evaluator.hpp"
#include "gesha/instance_io.hpp"
#include "gesha/reports.hpp"
#include "gesha/sha_engine.hpp"
#include "gesha/stage_builders.hpp"

namespace gesha {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";

const std::vector<std::string> kAlgorithms = {"shacv", "shace", "shaxe", "benders", "oneshot", "opf-only"};

bool is_sha(const std::string& algorithm) {
  return algorithm == "shacv" || algorithm == "shace" || algorithm == "shaxe";
}

}  // namespace

void validate_run_config(const RunConfig& c) {
  if (std::find(kAlgorithms.begin(), kAlgorithms.end(), c.algorithm) == kAlgorithms.end()) {
    throw ConfigError("unknown algorithm '" + c.algorithm +
                      "' (expected shacv, shace, shaxe, benders, oneshot or opf-only)");
  }
  if (c.instance.empty()) throw ConfigError("--instance is required");
  if (c.scenarios.empty()) throw ConfigError("--scenarios is required");
  if (!(c.split > 0.0 && c.split <= 1.0)) throw ConfigError("split ratio must be in (0, 1]");
  if (c.horizon < 0) throw ConfigError("horizon must be non-negative");
  if (!(c.stress_gas > 0.0) || !(c.stress_non_gas > 0.0)) throw ConfigError("cost multipliers must be positive");
  if (c.workers < 1) throw ConfigError("workers must be at least 1");
  if (c.eval_every < 0) throw ConfigError("evaluation cadence must be non-negative");
  parse_window(c.window);
  parse_gradient_source(c.q0_source);
  make_lp_backend(c.backend);
}

std::string run_config_to_json(const RunConfig& c) {
  ordered_json j;
  j["instance"] = c.instance;
  j["scenarios"] = c.scenarios;
  j["split"] = c.split;
  j["seed"] = c.seed;
  j["horizon"] = c.horizon;
  j["stress_gas"] = c.stress_gas;
  j["stress_non_gas"] = c.stress_non_gas;
  j["algorithm"] = c.algorithm;
  j["rho"] = c.rho;
  j["a"] = c.a;
  j["window"] = c.window;
  j["tolerance"] = c.tolerance;
  j["max_iterations"] = c.max_iterations;
  j["min_iterations"] = c.min_iterations;
  j["time_limit"] = std::isfinite(c.time_limit) ? ordered_json(c.time_limit) : ordered_json(nullptr);
  j["q0_source"] = c.q0_source;
  j["master_tolerance"] = c.master_tolerance;
  j["eval_every"] = c.eval_every;
  j["benders_epsilon"] = c.benders_epsilon;
  j["benders_stall"] = c.benders_stall;
  j["benders_max_iterations"] = c.benders_max_iterations;
  j["slp_max_iterations"] = c.slp_max_iterations;
  j["slp_radius"] = c.slp_radius;
  j["slp_smoothing"] = c.slp_smoothing;
  j["slp_feasibility"] = c.slp_feasibility;
  j["slp_corrections"] = c.slp_corrections;
  j["backend"] = c.backend;
  j["workers"] = c.workers;
  j["out"] = c.out;
  j["evaluate"] = c.evaluate;
  return j.dump(2);
}

RunConfig run_config_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("config: ") + e.what());
  }
  if (j.contains("config")) j = j["config"];
  if (!j.is_object()) throw DataError("config: expected an object");
  RunConfig c;
  const std::map<std::string, std::function<void(const ordered_json&)>> setters = {
      {"instance", [&](const ordered_json& v) { c.instance = v.get<std::string>(); }},
      {"scenarios", [&](const ordered_json& v) { c.scenarios = v.get<std::string>(); }},
      {"split", [&](const ordered_json& v) { c.split = v.get<double>(); }},
      {"seed", [&](const ordered_json& v) { c.seed = v.get<std::uint64_t>(); }},
      {"horizon", [&](const ordered_json& v) { c.horizon = v.get<int>(); }},
      {"stress_gas", [&](const ordered_json& v) { c.stress_gas = v.get<double>(); }},
      {"stress_non_gas", [&](const ordered_json& v) { c.stress_non_gas = v.get<double>(); }},
      {"algorithm", [&](const ordered_json& v) { c.algorithm = v.get<std::string>(); }},
      {"rho", [&](const ordered_json& v) { c.rho = v.get<double>(); }},
      {"a", [&](const ordered_json& v) { c.a = v.get<double>(); }},
      {"window", [&](const ordered_json& v) { c.window = v.get<std::string>(); }},
      {"tolerance", [&](const ordered_json& v) { c.tolerance = v.get<double>(); }},
      {"max_iterations", [&](const ordered_json& v) { c.max_iterations = v.get<int>(); }},
      {"min_iterations", [&](const ordered_json& v) { c.min_iterations = v.get<int>(); }},
      {"time_limit",
       [&](const ordered_json& v) {
         c.time_limit = v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
       }},
      {"q0_source", [&](const ordered_json& v) { c.q0_source = v.get<std::string>(); }},
      {"master_tolerance", [&](const ordered_json& v) { c.master_tolerance = v.get<double>(); }},
      {"eval_every", [&](const ordered_json& v) { c.eval_every = v.get<int>(); }},
      {"benders_epsilon", [&](const ordered_json& v) { c.benders_epsilon = v.get<double>(); }},
      {"benders_stall", [&](const ordered_json& v) { c.benders_stall = v.get<double>(); }},
      {"benders_max_iterations", [&](const ordered_json& v) { c.benders_max_iterations = v.get<int>(); }},
      {"slp_max_iterations", [&](const ordered_json& v) { c.slp_max_iterations = v.get<int>(); }},
      {"slp_radius", [&](const ordered_json& v) { c.slp_radius = v.get<double>(); }},
      {"slp_smoothing", [&](const ordered_json& v) { c.slp_smoothing = v.get<double>(); }},
      {"slp_feasibility", [&](const ordered_json& v) { c.slp_feasibility = v.get<double>(); }},
      {"slp_corrections", [&](const ordered_json& v) { c.slp_corrections = v.get<int>(); }},
      {"backend", [&](const ordered_json& v) { c.backend = v.get<std::string>(); }},
      {"workers", [&](const ordered_json& v) { c.workers = v.get<int>(); }},
      {"out", [&](const ordered_json& v) { c.out = v.get<std::string>(); }},
      {"evaluate", [&](const ordered_json& v) { c.evaluate = v.get<bool>(); }},
  };
  for (const auto& [key, value] : j.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw DataError("config: unknown key '" + key + "'");
    try {
      it->second(value);
    } catch (const nlohmann::json::exception&) {
      throw DataError("config: bad value for '" + key + "'");
    }
  }
  return c;
}

namespace {

struct Problem {
  Instance instance;
  ScenarioSet scenarios;
};

Problem load_problem(const RunConfig& c) {
  if (!fs::exists(c.instance)) throw DataError("instance file not found: " + c.instance);
  if (!fs::exists(c.scenarios)) throw DataError("scenario file not found: " + c.scenarios);
  Problem p;
  p.instance = load_instance(c.instance);
  const auto violations = validate(p.instance);
  if (!violations.empty()) {
    throw DataError("instance is invalid: " + violations.front().element + ": " + violations.front().rule);
  }
  if (c.horizon > 0) p.instance = truncate_horizon(p.instance, c.horizon);
  if (c.stress_gas != 1.0 || c.stress_non_gas != 1.0) {
    p.instance = apply_cost_stress(p.instance, {c.stress_gas, c.stress_non_gas});
  }
  p.scenarios = load_scenarios(c.scenarios, c.split, c.seed, p.instance.num_steps());
  if (p.scenarios.training.empty()) throw ConfigError("split leaves no training scenarios");
  return p;
}

SubproblemConfig subproblem_config(const RunConfig& c) {
  SubproblemConfig s;
  s.slp.max_iterations = c.slp_max_iterations;
  s.slp.initial_radius = c.slp_radius;
  s.slp.smoothing = c.slp_smoothing;
  s.slp.feasibility_tolerance = c.slp_feasibility;
  s.slp.corrections = c.slp_corrections;
  s.slp.validate();
  s.backend = c.backend;
  return s;
}

ShaConfig sha_config(const RunConfig& c) {
  ShaConfig s;
  s.variant = parse_variant(c.algorithm);
  s.q0_source = parse_gradient_source(c.q0_source);
  s.rho = c.rho;
  s.a = c.a;
  s.window = parse_window(c.window);
  s.tolerance = c.tolerance;
  s.max_iterations = c.max_iterations;
  s.min_iterations = c.min_iterations;
  s.time_limit = c.time_limit;
  s.seed = c.seed;
  s.master_tolerance = c.master_tolerance;
  s.evaluation_interval = c.eval_every;
  s.workers = c.workers;
  s.subproblem = subproblem_config(c);
  s.validate();
  return s;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << text;
}

template <typename F>
void write_with(const fs::path& path, F&& fill) {
  std::ostringstream os;
  fill(os);
  write_file(path, os.str());
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<EvaluationReport> evaluate_both(const Problem& p, const std::vector<double>& x,
                                            const RunConfig& c, const std::string& label) {
  EvaluateOptions eo;
  eo.subproblem = subproblem_config(c);
  eo.workers = c.workers;
  eo.label = label;
  std::vector<EvaluationReport> out{evaluate(p.instance, x, p.scenarios.training_set(), eo)};
  if (!p.scenarios.testing.empty()) {
    eo.out_of_sample = true;
    out.push_back(evaluate(p.instance, x, p.scenarios.testing_set(), eo));
  }
  return out;
}

int cmd_solve(const RunConfig& c, std::ostream& out) {
  validate_run_config(c);
  const auto p = load_problem(c);
  const fs::path dir(c.out);
  fs::create_directories(dir);
  const auto t0 = std::chrono::steady_clock::now();

  ordered_json result;
  result["algorithm"] = c.algorithm;
  result["training_scenarios"] = p.scenarios.training.size();
  result["testing_scenarios"] = p.scenarios.testing.size();
  std::vector<double> x;

  if (is_sha(c.algorithm)) {
    const auto r = run_sha(p.instance, p.scenarios, sha_config(c));
    x = r.x_bar;
    result["stop_reason"] = r.stop_reason;
    result["iterations"] = r.iterations;
    const double delta = r.history.empty() ? std::nan("") : r.history.back().delta;
    result["final_delta"] = std::isfinite(delta) ? ordered_json(delta) : ordered_json(nullptr);
    result["flagged_iterations"] =
        std::count_if(r.history.begin(), r.history.end(), [](const ShaRecord& h) { return h.flagged; });
    write_with(dir / "history.csv", [&](std::ostream& os) { write_sha_history_csv(os, r.history); });
    write_with(dir / "timing.csv", [&](std::ostream& os) { write_sha_timing_csv(os, r.history); });
  } else if (c.algorithm == "benders") {
    BendersConfig bc;
    bc.epsilon = c.benders_epsilon;
    bc.stall_tolerance = c.benders_stall;
    bc.max_iterations = c.benders_max_iterations;
    bc.time_limit = c.time_limit;
    bc.workers = c.workers;
    bc.subproblem = subproblem_config(c);
    const auto r = run_benders(p.instance, p.scenarios.training_set(), bc);
    x = r.x;
    result["stop_reason"] = r.stop_reason;
    result["iterations"] = r.iterations;
    result["lower_bound"] = r.lower;
    result["upper_bound"] = r.upper;
    result["gap"] = r.gap();
    result["failed_solves"] = r.failed_solves;
    write_with(dir / "history.csv", [&](std::ostream& os) { write_benders_history_csv(os, r.history); });
    write_with(dir / "timing.csv", [&](std::ostream& os) { write_benders_timing_csv(os, r.history); });
  } else {
    const auto sub = subproblem_config(c);
    const auto r = c.algorithm == "oneshot" ? solve_one_shot(p.instance, p.scenarios.training_set(), sub)
                                            : solve_opf_only(p.instance, p.scenarios.training_set(), sub);
    if (r.x.empty()) throw SolverError(c.algorithm + ": " + r.message);
    x = r.x;
    result["converged"] = r.converged;
    result["objective"] = r.objective;
    result["slp_iterations"] = r.slp_iterations;
    result["max_residual"] = r.max_residual;
    if (!r.message.empty()) result["message"] = r.message;
    write_file(dir / "history.csv", "slp_iterations,objective,max_residual,converged\n" +
                                        std::to_string(r.slp_iterations) + ',' + format_number(r.objective) +
                                        ',' + format_number(r.max_residual) + ',' +
                                        (r.converged ? "1" : "0") + '\n');
    write_file(dir / "timing.csv", "wall_seconds\n" + format_number(r.wall) + '\n');
  }
  const double wall = seconds_since(t0);
  result["wall_seconds"] = wall;
  write_with(dir / "solution.csv", [&](std::ostream& os) { write_solution_csv(os, p.instance, x); });

  if (c.evaluate) {
    const auto reports = evaluate_both(p, x, c, c.algorithm);
    result["value_training"] = reports.front().value;
    if (reports.size() > 1) result["value_testing"] = reports.back().value;
    write_with(dir / "evaluation.csv", [&](std::ostream& os) { write_reports_csv(os, reports); });
    write_file(dir / "report.txt", format_reports_table(reports));
  }

  ordered_json manifest;
  manifest["tool"] = "gesha";
  manifest["version"] = kVersion;
  manifest["command"] = "solve";
  manifest["config"] = ordered_json::parse(run_config_to_json(c));
  manifest["result"] = result;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");

  out << c.algorithm << ": " << (result.contains("stop_reason") ? result["stop_reason"].get<std::string>() : "done")
      << " after " << format_number(wall) << " s, solution in " << (dir / "solution.csv").string() << "\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string solution;
  std::string set = "training";
  std::string label;
  std::string baseline;
};

int cmd_evaluate(const RunConfig& c, const EvaluateArgs& a, std::ostream& out) {
  validate_run_config(c);
  if (a.set != "training" && a.set != "testing" && a.set != "all") {
    throw ConfigError("--set must be training, testing or all");
  }
  if (!fs::exists(a.solution)) throw DataError("solution file not found: " + a.solution);
  const auto p = load_problem(c);
  const auto x = read_solution_csv(a.solution, p.instance);
  EvaluateOptions eo;
  eo.subproblem = subproblem_config(c);
  eo.workers = c.workers;
  eo.label = a.label.empty() ? fs::path(a.solution).stem().string() : a.label;
  std::vector<Scenario> scen;
  if (a.set == "training") {
    scen = p.scenarios.training_set();
  } else if (a.set == "testing") {
    scen = p.scenarios.testing_set();
    eo.out_of_sample = true;
  } else {
    scen = p.scenarios.scenarios;
  }
  if (scen.empty()) throw ConfigError("the selected scenario set is empty");
  std::vector<EvaluationReport> reports{evaluate(p.instance, x, scen, eo)};
  double baseline = 0.0;
  if (!a.baseline.empty()) {
    if (!fs::exists(a.baseline)) throw DataError("baseline solution not found: " + a.baseline);
    auto bo = eo;
    bo.label = "baseline";
    reports.push_back(evaluate(p.instance, read_solution_csv(a.baseline, p.instance), scen, bo));
    baseline = reports.back().value;
  }
  const fs::path dir(c.out);
  fs::create_directories(dir);
  write_with(dir / "report.csv", [&](std::ostream& os) { write_reports_csv(os, reports, baseline); });
  write_with(dir / "scenarios.csv", [&](std::ostream& os) { write_scenarios_csv(os, reports.front()); });
  const auto table = format_reports_table(reports, baseline);
  write_file(dir / "report.txt", table);
  out << table;
  return kExitOk;
}

struct Run {
  fs::path dir;
  RunConfig config;
  ordered_json result;
  std::vector<double> x;
};

Run load_run(const fs::path& dir) {
  Run r;
  r.dir = dir;
  const auto text = read_file(dir / "manifest.json");
  r.config = run_config_from_json(text);
  try {
    r.result = ordered_json::parse(text).at("result");
  } catch (const nlohmann::json::exception&) {
    throw DataError("manifest in " + dir.string() + " has no result");
  }
  return r;
}

bool same_problem(const RunConfig& a, const RunConfig& b) {
  return a.instance == b.instance && a.scenarios == b.scenarios && a.split == b.split && a.seed == b.seed &&
         a.horizon == b.horizon && a.stress_gas == b.stress_gas && a.stress_non_gas == b.stress_non_gas;
}

double variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

int cmd_window_study(const RunConfig& c, std::ostream& out) {
  validate_run_config(c);
  if (!is_sha(c.algorithm)) throw ConfigError("the window study needs an SHA algorithm");
  const auto p = load_problem(c);
  const fs::path dir(c.out);
  fs::create_directories(dir);
  std::ostringstream curves, summary;
  curves << "window,nu,delta\n";
  summary << "window,iterations,terminal_delta,delta_variance\n";
  for (const char* w : {"1", "100", "inf", "half"}) {
    auto cfg = sha_config(c);
    cfg.window = parse_window(w);
    cfg.min_iterations = cfg.max_iterations;  // fixed-length curves
    const auto r = run_sha(p.instance, p.scenarios, cfg);
    std::vector<double> deltas;
    for (const auto& h : r.history) {
      if (std::isnan(h.delta)) continue;
      deltas.push_back(h.delta);
      curves << w << ',' << h.nu << ',' << format_number(h.delta) << '\n';
    }
    // The tail mean is a steadier terminal value than the last sample.
    const std::size_t tail = std::max<std::size_t>(1, deltas.size() / 10);
    double terminal = 0.0;
    for (std::size_t i = deltas.size() - tail; i < deltas.size(); ++i) terminal += deltas[i];
    terminal /= static_cast<double>(tail);
    summary << w << ',' << r.iterations << ',' << format_number(terminal) << ',' << format_number(variance(deltas))
            << '\n';
  }
  write_file(dir / "window_study.csv", curves.str());
  write_file(dir / "window_summary.csv", summary.str());
  out << summary.str();
  return kExitOk;
}

int cmd_compare(const RunConfig& c, const std::vector<std::string>& runs, const std::string& baseline_dir,
                std::ostream& out) {
  if (baseline_dir.empty()) throw ConfigError("compare needs --baseline, a oneshot run directory");
  auto base = load_run(baseline_dir);
  if (base.config.algorithm != "oneshot") {
    throw ConfigError("baseline run must use the oneshot algorithm, got " + base.config.algorithm);
  }
  if (runs.empty()) throw ConfigError("compare needs at least one --run");
  std::vector<Run> all{base};
  for (const auto& d : runs) {
    all.push_back(load_run(d));
    if (!same_problem(all.back().config, base.config)) {
      throw ConfigError("run " + d + " was made on a different problem than the baseline");
    }
  }
  auto cfg = base.config;
  cfg.workers = c.workers;
  const auto p = load_problem(cfg);
  for (auto& r : all) r.x = read_solution_csv(r.dir / "solution.csv", p.instance);

  std::vector<std::vector<EvaluationReport>> reports;
  for (const auto& r : all) reports.push_back(evaluate_both(p, r.x, cfg, r.config.algorithm));
  const double v_train = reports.front().front().value;
  const double v_test = reports.front().size() > 1 ? reports.front().back().value : 0.0;

  const fs::path dir(c.out);
  fs::create_directories(dir);
  std::ostringstream quality, conv;
  quality << "algorithm,run,set,wall_seconds,value,ratio\n";
  for (std::size_t k = 0; k < all.size(); ++k) {
    const double wall = all[k].result.value("wall_seconds", 0.0);
    for (const auto& rep : reports[k]) {
      const double b = rep.out_of_sample ? v_test : v_train;
      quality << all[k].config.algorithm << ',' << all[k].dir.string() << ','
              << (rep.out_of_sample ? "testing" : "training") << ',' << format_number(wall) << ','
              << format_number(rep.value) << ',' << format_number(rep.value / b) << '\n';
    }
  }
  // Convergence traces: history rows joined with their wall times.
  conv << "algorithm,run,iteration,wall_seconds,delta,value,lower,upper\n";
  for (const auto& r : all) {
    if (!fs::exists(r.dir / "history.csv") || !fs::exists(r.dir / "timing.csv")) continue;
    std::istringstream h(read_file(r.dir / "history.csv"));
    std::istringstream t(read_file(r.dir / "timing.csv"));
    std::string hl, tl;
    std::getline(h, hl);
    std::getline(t, tl);
    const bool sha = is_sha(r.config.algorithm);
    const bool benders = r.config.algorithm == "benders";
    while (std::getline(h, hl) && std::getline(t, tl)) {
      std::vector<std::string> hf, tf;
      std::string f;
      for (std::istringstream s(hl); std::getline(s, f, ',');) hf.push_back(f);
      for (std::istringstream s(tl); std::getline(s, f, ',');) tf.push_back(f);
      const std::string wall = tf.empty() ? "" : tf.back();
      conv << r.config.algorithm << ',' << r.dir.string() << ',';
      if (sha && hf.size() >= 5) {
        conv << hf[0] << ',' << wall << ',' << hf[3] << ',' << hf[4] << ",,\n";
      } else if (benders && hf.size() >= 3) {
        conv << hf[0] << ',' << wall << ",,," << hf[1] << ',' << hf[2] << '\n';
      } else {
        conv << "1," << wall << ",,,,\n";
      }
    }
  }
  write_file(dir / "quality.csv", quality.str());
  write_file(dir / "convergence.csv", conv.str());
  std::vector<EvaluationReport> train, test;
  for (const auto& rs : reports) {
    train.push_back(rs.front());
    if (rs.size() > 1) test.push_back(rs.back());
  }
  std::string table = format_reports_table(train, v_train);
  if (!test.empty()) table += "\n" + format_reports_table(test, v_test);
  write_file(dir / "report.txt", table);
  out << table;
  return kExitOk;
}

int cmd_validate(const std::string& instance, const std::string& scenarios, int horizon, std::ostream& out) {
  if (!fs::exists(instance)) throw DataError("instance file not found: " + instance);
  auto inst = load_instance(instance);
  if (horizon > 0) inst = truncate_horizon(inst, horizon);
  auto violations = validate(inst);
  if (!scenarios.empty()) {
    if (!fs::exists(scenarios)) throw DataError("scenario file not found: " + scenarios);
    try {
      const auto set = load_scenarios(scenarios, 1.0, 1, inst.num_steps());
      for (const auto& s : set.scenarios) {
        if (s.steps() < inst.num_steps()) {
          violations.push_back({s.name, "fewer steps than the instance horizon"});
        } else if (s.factor.size() != 1 && s.factor.size() != inst.electric.wind_farms.size()) {
          violations.push_back({s.name, "factor rows do not match the wind farms"});
        }
      }
    } catch (const DataError& e) {
      violations.push_back({scenarios, e.what()});
    }
  }
  for (const auto& v : violations) out << v.element << ": " << v.rule << "\n";
  if (!violations.empty()) return kExitData;
  out << inst.name << ": ok (" << inst.num_generators() << " generators, " << inst.num_steps() << " steps, "
      << inst.discretized.subpipes.size() << " subpipes)\n";
  return kExitOk;
}

int cmd_discretize(const std::string& instance, double max_segment, const std::string& csv, std::ostream& out) {
  if (!fs::exists(instance)) throw DataError("instance file not found: " + instance);
  auto inst = load_instance(instance);
  if (max_segment > 0.0) {
    inst.max_segment_length = max_segment;
    inst.finalize();
  }
  const auto& d = inst.discretized;
  std::ostringstream os;
  os << "subpipe,pipe,from,to,dx,diameter,vm,vp,vf\n";
  for (std::size_t k = 0; k < d.subpipes.size(); ++k) {
    const auto& s = d.subpipes[k];
    os << k << ',' << d.base.pipes[s.pipe].name << ',' << d.node_names[s.from] << ',' << d.node_names[s.to] << ','
       << format_number(s.dx) << ',' << format_number(s.diameter) << ',' << format_number(s.constants.vm) << ','
       << format_number(s.constants.vp) << ',' << format_number(s.constants.vf) << '\n';
  }
  if (!csv.empty()) write_file(csv, os.str());
  out << d.subpipes.size() << " subpipes, " << d.num_nodes() << " nodes (" << d.num_auxiliary()
      << " auxiliary), max segment " << format_number(inst.max_segment_length) << " m\n";
  if (csv.empty()) out << os.str();
  return kExitOk;
}

void add_run_options(CLI::App* app, RunConfig& c) {
  app->add_option("--instance", c.instance, "Instance JSON");
  app->add_option("--scenarios", c.scenarios, "Wind scenario CSV");
  app->add_option("--split", c.split, "Training share of the scenarios");
  app->add_option("--seed", c.seed, "Seed for the scenario order");
  app->add_option("--horizon", c.horizon, "Keep only the first N steps");
  app->add_option("--stress-gas", c.stress_gas, "Multiplier on gas supply and GFPP costs");
  app->add_option("--stress-non-gas", c.stress_non_gas, "Multiplier on other generator costs");
  app->add_flag_callback(
      "--stress",
      [&c] {
        c.stress_gas = 0.25;
        c.stress_non_gas = 2.0;
      },
      "Stress preset: gas x0.25, other generators x2");
  app->add_option("--algorithm", c.algorithm, "shacv, shace, shaxe, benders, oneshot, opf-only");
  app->add_option("--rho", c.rho, "Step size scale");
  app->add_option("--a", c.a, "SHACV curvature");
  app->add_option("--window", c.window, "Averaging window: integer, inf or half");
  app->add_option("--tol", c.tolerance, "Stop when the averaged-solution change falls below this");
  app->add_option("--max-iter", c.max_iterations, "Iteration limit");
  app->add_option("--min-iter", c.min_iterations, "No tolerance stop before this iteration");
  app->add_option("--time-limit", c.time_limit, "Seconds");
  app->add_option("--q0-source", c.q0_source, "master or subproblem");
  app->add_option("--master-tol", c.master_tolerance, "SHACV cut refinement accuracy");
  app->add_option("--eval-every", c.eval_every, "Evaluate the averaged solution every k iterations");
  app->add_option("--benders-eps", c.benders_epsilon, "Benders relative gap");
  app->add_option("--benders-stall", c.benders_stall, "Benders bound-change stop");
  app->add_option("--benders-max-iter", c.benders_max_iterations, "Benders iteration limit");
  app->add_option("--slp-max-iter", c.slp_max_iterations, "SLP iteration limit");
  app->add_option("--slp-radius", c.slp_radius, "Initial trust region (scaled units)");
  app->add_option("--slp-smoothing", c.slp_smoothing, "Smoothing of |m| in the friction term");
  app->add_option("--slp-feas-tol", c.slp_feasibility, "Scaled nonlinear residual tolerance");
  app->add_option("--slp-corrections", c.slp_corrections, "Correction solves per SLP step");
  app->add_option("--backend", c.backend, "LP backend: simplex or dense");
  app->add_option("--workers", c.workers, "Concurrent subproblem solves");
  app->add_option("--out", c.out, "Output directory");
}

// Loads --config before the other flags so explicit flags override it.
RunConfig initial_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") return run_config_from_json(read_file(args[i + 1]));
    if (args[i].rfind("--config=", 0) == 0) return run_config_from_json(read_file(args[i].substr(9)));
  }
  return {};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    CLI::App app{"Two-stage gas-electric scheduling with stochastic hybrid approximation", "gesha"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
    RunConfig c = initial_config(rest);
    std::string config_path;

    auto* solve = app.add_subcommand("solve", "Run one algorithm and write its artifacts");
    add_run_options(solve, c);
    solve->add_option("--config", config_path, "Start from a manifest or config JSON");
    solve->add_flag("--evaluate", c.evaluate, "Also evaluate the solution on both scenario sets");

    EvaluateArgs ea;
    auto* eval = app.add_subcommand("evaluate", "Evaluate a first-stage solution");
    add_run_options(eval, c);
    eval->add_option("--config", config_path, "Start from a manifest or config JSON");
    eval->add_option("--solution", ea.solution, "Solution CSV")->required();
    eval->add_option("--set", ea.set, "training, testing or all");
    eval->add_option("--label", ea.label, "Column label");
    eval->add_option("--baseline", ea.baseline, "Baseline solution CSV for the ratio");

    std::vector<std::string> runs;
    std::string baseline;
    bool window_study = false;
    auto* cmp = app.add_subcommand("compare", "Compare solve runs against a oneshot baseline");
    add_run_options(cmp, c);
    cmp->add_option("--config", config_path, "Start from a manifest or config JSON");
    cmp->add_option("--run", runs, "Run directory (repeatable)");
    cmp->add_option("--baseline", baseline, "Oneshot run directory");
    cmp->add_flag("--window-study", window_study, "Run the averaging-window study instead");

    std::string v_instance, v_scenarios;
    int v_horizon = 0;
    auto* val = app.add_subcommand("validate", "Check an instance (and scenarios)");
    val->add_option("--instance", v_instance, "Instance JSON")->required();
    val->add_option("--scenarios", v_scenarios, "Wind scenario CSV");
    val->add_option("--horizon", v_horizon, "Keep only the first N steps");

    std::string d_instance, d_csv;
    double d_segment = 0.0;
    auto* disc = app.add_subcommand("discretize", "Show the discretized gas network");
    disc->add_option("--instance", d_instance, "Instance JSON")->required();
    disc->add_option("--max-segment", d_segment, "Override the maximum subpipe length (m)");
    disc->add_option("--csv", d_csv, "Write the subpipe table to this file");

    std::vector<std::string> reversed(rest.rbegin(), rest.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::CallForVersion& e) {
      out << kVersion << "\n";
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) {
        out << app.help();
        return kExitOk;
      }
      err << "usage error: " << e.what() << "\n";
      return kExitUsage;
    }

    if (*solve) return cmd_solve(c, out);
    if (*eval) return cmd_evaluate(c, ea, out);
    if (*cmp) return window_study ? cmd_window_study(c, out) : cmd_compare(c, runs, baseline, out);
    if (*val) return cmd_validate(v_instance, v_scenarios, v_horizon, out);
    if (*disc) return cmd_discretize(d_instance, d_segment, d_csv, out);
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run_cli(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace gesha

#include "gesha/reports.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "gesha/errors.hpp"

namespace gesha {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_solution_csv(std::ostream& out, const Instance& inst, std::span<const double> x) {
  if (static_cast<int>(x.size()) != inst.num_x()) throw DataError("solution has the wrong dimension");
  out << "generator,t,x\n";
  for (int g = 0; g < inst.num_generators(); ++g) {
    for (int t = 0; t < inst.num_steps(); ++t) {
      out << inst.electric.generators[g].name << ',' << t + 1 << ','
          << format_number(x[inst.x_index(g, t)]) << '\n';
    }
  }
}

std::vector<double> parse_solution_csv(const std::string& text, const Instance& inst) {
  std::map<std::string, int> gen;
  for (int g = 0; g < inst.num_generators(); ++g) gen[inst.electric.generators[g].name] = g;
  std::vector<double> x(static_cast<std::size_t>(inst.num_x()), 0.0);
  std::vector<char> seen(x.size(), 0);
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1) {
      if (line != "generator,t,x") throw DataError("solution file: expected header generator,t,x");
      continue;
    }
    std::istringstream ls(line);
    std::string name, ts, xs;
    if (!std::getline(ls, name, ',') || !std::getline(ls, ts, ',') || !std::getline(ls, xs)) {
      throw DataError("solution file line " + std::to_string(lineno) + ": expected 3 fields");
    }
    const auto it = gen.find(name);
    if (it == gen.end()) throw DataError("solution file: unknown generator '" + name + "'");
    int t = 0;
    double v = 0.0;
    try {
      std::size_t used = 0;
      t = std::stoi(ts, &used);
      if (used != ts.size()) throw std::invalid_argument(ts);
      v = std::stod(xs, &used);
      if (used != xs.size()) throw std::invalid_argument(xs);
    } catch (const std::logic_error&) {
      throw DataError("solution file line " + std::to_string(lineno) + ": bad number");
    }
    if (t < 1 || t > inst.num_steps()) {
      throw DataError("solution file line " + std::to_string(lineno) + ": step out of range");
    }
    const int i = inst.x_index(it->second, t - 1);
    if (seen[i]) throw DataError("solution file: duplicate entry for " + name + " at t=" + ts);
    seen[i] = 1;
    x[i] = v;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw DataError("solution file: missing entries (expected " + std::to_string(x.size()) + ")");
  }
  return x;
}

std::vector<double> read_solution_csv(const std::filesystem::path& path, const Instance& inst) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open solution file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_solution_csv(ss.str(), inst);
}

void write_sha_history_csv(std::ostream& out, const std::vector<ShaRecord>& history) {
  out << "nu,scenario,master_objective,delta,value,flagged\n";
  for (const auto& r : history) {
    out << r.nu << ',' << r.scenario << ',' << format_number(r.master_objective) << ','
        << (std::isnan(r.delta) ? "" : format_number(r.delta)) << ','
        << (std::isnan(r.value) ? "" : format_number(r.value)) << ',' << (r.flagged ? 1 : 0) << '\n';
  }
}

void write_sha_timing_csv(std::ostream& out, const std::vector<ShaRecord>& history) {
  out << "nu,wall_seconds\n";
  for (const auto& r : history) out << r.nu << ',' << format_number(r.wall) << '\n';
}

void write_benders_history_csv(std::ostream& out, const std::vector<BendersRecord>& history) {
  out << "iteration,lower,upper\n";
  for (const auto& r : history) {
    out << r.iteration << ',' << format_number(r.lower) << ',' << format_number(r.upper) << '\n';
  }
}

void write_benders_timing_csv(std::ostream& out, const std::vector<BendersRecord>& history) {
  out << "iteration,wall_seconds\n";
  for (const auto& r : history) out << r.iteration << ',' << format_number(r.wall) << '\n';
}

namespace {

std::string ratio(double v, double baseline) {
  return baseline > 0.0 ? format_number(v / baseline) : std::string();
}

}  // namespace

void write_reports_csv(std::ostream& out, const std::vector<EvaluationReport>& reports, double baseline) {
  out << "label,set,currency,value,ratio,first_stage_cost,second_stage_elec,second_stage_gas,"
         "wind_spill_mean,wind_spill_max,wind_spill_min,load_shed_mean,load_shed_max,load_shed_min,"
         "gas_shed_mean,gas_shed_max,gas_shed_min,gfpp_energy,scenarios,failed,not_converged\n";
  for (const auto& r : reports) {
    out << r.label << ',' << (r.out_of_sample ? "testing" : "training") << ',' << r.currency << ','
        << format_number(r.value) << ',' << ratio(r.value, baseline) << ','
        << format_number(r.first_stage_cost) << ',' << format_number(r.second_stage_elec.mean) << ','
        << format_number(r.second_stage_gas.mean);
    for (const auto* s : {&r.wind_spill_pct, &r.load_shed_pct, &r.gas_shed_pct}) {
      out << ',' << format_number(s->mean) << ',' << format_number(s->max) << ',' << format_number(s->min);
    }
    out << ',' << format_number(r.first_stage_gfpp_energy) << ',' << r.scenarios.size() << ','
        << r.failed << ',' << r.not_converged << '\n';
  }
}

void write_scenarios_csv(std::ostream& out, const EvaluationReport& r) {
  out << "scenario,failed,converged,g,h_elec,h_gas_net,wind_spill_pct,load_shed_pct,gas_shed_pct,"
         "gfpp_energy,slp_iterations,max_residual\n";
  for (const auto& s : r.scenarios) {
    out << s.name << ',' << (s.failed ? 1 : 0) << ',' << (s.converged ? 1 : 0) << ','
        << format_number(s.g) << ',' << format_number(s.h_elec) << ',' << format_number(s.h_gas_net)
        << ',' << format_number(s.spill_percent()) << ',' << format_number(s.load_shed_percent())
        << ',' << format_number(s.gas_shed_percent()) << ',' << format_number(s.gfpp_energy) << ','
        << s.slp_iterations << ',' << format_number(s.max_residual) << '\n';
  }
}

std::string format_reports_table(const std::vector<EvaluationReport>& reports, double baseline) {
  std::ostringstream os;
  const int label_w = 30;
  const int col_w = 26;
  auto fixed = [](double v, int prec) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(prec) << v;
    return s.str();
  };
  auto row = [&](const std::string& name, auto cell) {
    os << std::left << std::setw(label_w) << name << std::right;
    for (const auto& r : reports) os << std::setw(col_w) << cell(r);
    os << '\n';
  };
  const std::string cur = reports.empty() ? "" : " [" + reports.front().currency + "]";
  row("", [](const EvaluationReport& r) { return r.label; });
  row("set", [](const EvaluationReport& r) {
    return std::string(r.out_of_sample ? "testing (out-of-sample)" : "training (in-sample)");
  });
  row("V" + cur, [&](const EvaluationReport& r) { return fixed(r.value, 2); });
  if (baseline > 0.0) row("V / V(one-shot)", [&](const EvaluationReport& r) { return fixed(r.value / baseline, 5); });
  row("1st stage electric" + cur, [&](const EvaluationReport& r) { return fixed(r.first_stage_cost, 2); });
  row("2nd stage electric (mean)", [&](const EvaluationReport& r) { return fixed(r.second_stage_elec.mean, 2); });
  row("2nd stage gas (mean)", [&](const EvaluationReport& r) { return fixed(r.second_stage_gas.mean, 2); });
  row("wind spill % mean", [&](const EvaluationReport& r) { return fixed(r.wind_spill_pct.mean, 3); });
  row("wind spill % max", [&](const EvaluationReport& r) { return fixed(r.wind_spill_pct.max, 3); });
  row("wind spill % min", [&](const EvaluationReport& r) { return fixed(r.wind_spill_pct.min, 3); });
  row("load shed % mean", [&](const EvaluationReport& r) { return fixed(r.load_shed_pct.mean, 3); });
  row("load shed % max", [&](const EvaluationReport& r) { return fixed(r.load_shed_pct.max, 3); });
  row("load shed % min", [&](const EvaluationReport& r) { return fixed(r.load_shed_pct.min, 3); });
  row("gas shed % mean", [&](const EvaluationReport& r) { return fixed(r.gas_shed_pct.mean, 3); });
  row("gas shed % max", [&](const EvaluationReport& r) { return fixed(r.gas_shed_pct.max, 3); });
  row("gas shed % min", [&](const EvaluationReport& r) { return fixed(r.gas_shed_pct.min, 3); });
  row("GFPP energy scheduled [MWh]", [&](const EvaluationReport& r) { return fixed(r.first_stage_gfpp_energy, 1); });
  row("scenarios", [](const EvaluationReport& r) { return std::to_string(r.scenarios.size()); });
  row("failed / not converged", [](const EvaluationReport& r) {
    return std::to_string(r.failed) + " / " + std::to_string(r.not_converged);
  });
  return os.str();
}

}  // namespace gesha

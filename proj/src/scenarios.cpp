#include "gesha/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "gesha/errors.hpp"

namespace gesha {

double Scenario::total() const {
  double sum = 0.0;
  for (const auto& row : factor) sum = std::accumulate(row.begin(), row.end(), sum);
  return sum;
}

std::vector<std::vector<double>> wind_output(const ElectricNetwork& net, const Scenario& s) {
  std::vector<std::vector<double>> out;
  if (s.factor.size() != 1 && s.factor.size() != net.wind_farms.size()) {
    throw DataError("scenario " + s.name + " has " + std::to_string(s.factor.size()) +
                    " farm profiles for " + std::to_string(net.wind_farms.size()) + " wind farms");
  }
  for (std::size_t k = 0; k < net.wind_farms.size(); ++k) {
    auto row = s.farm(static_cast<int>(k));
    for (auto& v : row) v *= net.wind_farms[k].capacity;
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<Scenario> ScenarioSet::select(const std::vector<int>& ids) const {
  std::vector<Scenario> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(scenarios.at(static_cast<std::size_t>(i)));
  return out;
}

Scenario ScenarioSet::expectation() const {
  if (training.empty()) throw ConfigError("expectation of an empty training set");
  Scenario mean;
  mean.name = "expected";
  mean.factor = scenarios[training.front()].factor;
  for (auto& row : mean.factor) std::fill(row.begin(), row.end(), 0.0);
  for (int i : training) {
    const auto& f = scenarios[i].factor;
    for (std::size_t k = 0; k < f.size(); ++k) {
      for (std::size_t t = 0; t < f[k].size(); ++t) mean.factor[k][t] += f[k][t];
    }
  }
  const double n = static_cast<double>(training.size());
  for (auto& row : mean.factor) {
    for (auto& v : row) v /= n;
  }
  return mean;
}

ScenarioSet make_scenario_set(std::vector<Scenario> scenarios, double split_ratio,
                              std::uint64_t seed) {
  if (!(split_ratio > 0.0) || split_ratio > 1.0) {
    throw ConfigError("split ratio must lie in (0, 1]");
  }
  ScenarioSet set;
  set.seed = seed;
  set.scenarios = std::move(scenarios);
  const auto count = set.scenarios.size();
  const auto n_train = static_cast<std::size_t>(std::floor(split_ratio * static_cast<double>(count) + 1e-9));
  if (n_train == 0) {
    throw ConfigError("split ratio " + std::to_string(split_ratio) + " leaves no training scenarios out of " +
                      std::to_string(count));
  }
  for (std::size_t i = 0; i < count; ++i) {
    (i < n_train ? set.training : set.testing).push_back(static_cast<int>(i));
  }
  return set;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

ScenarioSet parse_scenarios(const std::string& csv_text, double split_ratio, std::uint64_t seed,
                            int steps) {
  std::stringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("scenario file is empty");
  const auto header = split_csv(line);
  if (header.size() < 2) throw DataError("scenario header needs a time column and at least one scenario");

  // Column -> (scenario, farm slot).
  std::vector<Scenario> scenarios;
  std::map<std::string, int> by_name;
  std::vector<std::pair<int, int>> slot;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto& h = header[c];
    const auto colon = h.find(':');
    const std::string name = colon == std::string::npos ? h : h.substr(0, colon);
    if (name.empty()) throw DataError("scenario header column " + std::to_string(c) + " is empty");
    auto [it, fresh] = by_name.emplace(name, static_cast<int>(scenarios.size()));
    if (fresh) scenarios.push_back({name, {}});
    auto& s = scenarios[it->second];
    if (colon == std::string::npos && !fresh) throw DataError("duplicate scenario column " + h);
    slot.emplace_back(it->second, static_cast<int>(s.factor.size()));
    s.factor.emplace_back();
  }
  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (steps > 0 && row_no - 1 > steps) break;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw DataError("scenario row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                      " fields, expected " + std::to_string(header.size()));
    }
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw DataError("scenario row " + std::to_string(row_no) + " column " + header[c] +
                        " is not a number");
      }
      if (!(v >= 0.0 && v <= 1.0)) {
        throw DataError("scenario row " + std::to_string(row_no) + " column " + header[c] +
                        " value " + cells[c] + " outside [0, 1]");
      }
      const auto [s, k] = slot[c - 1];
      scenarios[s].factor[k].push_back(v);
    }
  }
  if (scenarios.front().factor.front().empty()) throw DataError("scenario file has no data rows");
  if (steps > 0 && scenarios.front().steps() < steps) {
    throw DataError("scenario file has " + std::to_string(scenarios.front().steps()) +
                    " rows, horizon needs " + std::to_string(steps));
  }
  for (const auto& s : scenarios) {
    if (s.factor.size() != scenarios.front().factor.size()) {
      throw DataError("scenario " + s.name + " has a different number of farm columns");
    }
  }
  return make_scenario_set(std::move(scenarios), split_ratio, seed);
}

ScenarioSet load_scenarios(const std::filesystem::path& path, double split_ratio,
                           std::uint64_t seed, int steps) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenarios(buf.str(), split_ratio, seed, steps);
}

Extrema extrema(const ScenarioSet& set) {
  if (set.training.empty()) throw ConfigError("extrema of an empty training set");
  Extrema e{set.training.front(), set.training.front()};
  double hi = set.scenarios[e.max_index].total();
  double lo = hi;
  for (int i : set.training) {
    const double tot = set.scenarios[i].total();
    if (tot > hi || (tot == hi && i < e.max_index)) {
      hi = tot;
      e.max_index = i;
    }
    if (tot < lo || (tot == lo && i < e.min_index)) {
      lo = tot;
      e.min_index = i;
    }
  }
  return e;
}

std::vector<int> iteration_order(const ScenarioSet& set, int num_iterations, std::uint64_t seed) {
  if (set.training.empty()) throw ConfigError("iteration order needs training scenarios");
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(std::max(num_iterations, 0)));
  std::mt19937_64 rng(seed);
  std::vector<int> epoch = set.training;
  while (static_cast<int>(order.size()) < num_iterations) {
    epoch = set.training;
    std::shuffle(epoch.begin(), epoch.end(), rng);
    for (int i : epoch) {
      if (static_cast<int>(order.size()) == num_iterations) break;
      order.push_back(i);
    }
  }
  return order;
}

}  // namespace gesha

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gesha/core_model.hpp"

namespace gesha {

// One wind realization. `factor[k][t]` is a per-unit output factor; with a
// single row it is shared by every farm (fully correlated wind), otherwise
// row k belongs to wind farm k.
struct Scenario {
  std::string name;
  std::vector<std::vector<double>> factor;

  [[nodiscard]] int steps() const { return factor.empty() ? 0 : static_cast<int>(factor[0].size()); }
  [[nodiscard]] const std::vector<double>& farm(int k) const {
    return factor.size() == 1 ? factor[0] : factor[static_cast<std::size_t>(k)];
  }
  [[nodiscard]] double total() const;
};

// W_{j,t} = capacity_j * factor_j(t), MW.
std::vector<std::vector<double>> wind_output(const ElectricNetwork& net, const Scenario& s);

struct ScenarioSet {
  std::vector<Scenario> scenarios;  // file order
  std::vector<int> training;
  std::vector<int> testing;
  std::uint64_t seed = 0;

  [[nodiscard]] std::vector<Scenario> select(const std::vector<int>& ids) const;
  [[nodiscard]] std::vector<Scenario> training_set() const { return select(training); }
  [[nodiscard]] std::vector<Scenario> testing_set() const { return select(testing); }
  // Per-step arithmetic mean of the training scenarios.
  [[nodiscard]] Scenario expectation() const;
};

// CSV with header `t,s1,s2,...` (one column per scenario) or `t,s1:w1,s1:w2,...`
// (one column per scenario and wind farm). The first floor(ratio * count)
// scenarios in file order form the training set. `steps` > 0 keeps only the
// first `steps` rows.
ScenarioSet load_scenarios(const std::filesystem::path& path, double split_ratio,
                           std::uint64_t seed, int steps = -1);
ScenarioSet parse_scenarios(const std::string& csv_text, double split_ratio, std::uint64_t seed,
                            int steps = -1);
// Same partition rule on in-memory scenarios.
ScenarioSet make_scenario_set(std::vector<Scenario> scenarios, double split_ratio,
                              std::uint64_t seed);

struct Extrema {
  int max_index = 0;  // positions in set.scenarios
  int min_index = 0;
};

// Training scenarios with the most and least total wind energy; ties go to
// the lowest index.
Extrema extrema(const ScenarioSet& set);

// Concatenated seeded permutations of the training indices, truncated to
// `num_iterations` entries.
std::vector<int> iteration_order(const ScenarioSet& set, int num_iterations, std::uint64_t seed);

}  // namespace gesha

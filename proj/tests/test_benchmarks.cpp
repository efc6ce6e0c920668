#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "gesha/benchmarks.hpp"
#include "gesha/errors.hpp"
#include "gesha/evaluator.hpp"
#include "gesha/lp_backend.hpp"
#include "gesha/stage_builders.hpp"

using namespace gesha;

namespace {

std::vector<Scenario> two_bus_scenarios(int steps) {
  std::vector<Scenario> out;
  const double levels[] = {0.1, 0.45, 0.9, 0.6, 0.25};
  for (int k = 0; k < 5; ++k) {
    std::vector<double> f;
    for (int t = 0; t < steps; ++t) f.push_back(std::fmod(levels[k] + 0.17 * t, 1.0));
    out.push_back({"w" + std::to_string(k), {f}});
  }
  return out;
}

}  // namespace

TEST_CASE("one-shot with one scenario is the CE problem on it") {
  const auto inst = fixture::two_bus(4);
  const auto sc = two_bus_scenarios(4);
  const auto os = solve_one_shot(inst, {sc[2]});
  REQUIRE(os.converged);
  const auto v = evaluate(inst, os.x, {sc[2]});
  CHECK(v.value == doctest::Approx(os.objective).epsilon(1e-9));
  const auto twice = solve_one_shot(inst, {sc[2], sc[2]});
  CHECK(twice.objective == doctest::Approx(os.objective).epsilon(1e-9));
}

TEST_CASE("one-shot objective equals the evaluator at its own x") {
  const auto inst = fixture::micro();
  const auto set = fixture::micro_scenarios();
  const std::vector<Scenario> three{set.scenarios[0], set.scenarios[4], set.scenarios[7]};
  const auto os = solve_one_shot(inst, three);
  REQUIRE(os.converged);
  CHECK(os.max_residual <= 1e-6);
  const auto v = evaluate(inst, os.x, three);
  CHECK(v.failed == 0);
  CHECK(v.value == doctest::Approx(os.objective).epsilon(1e-6));
  // Duplicating the whole set changes nothing.
  const std::vector<Scenario> six{three[0], three[1], three[2], three[0], three[1], three[2]};
  CHECK(solve_one_shot(inst, six).objective == doctest::Approx(os.objective).epsilon(1e-6));
}

TEST_CASE("one-shot rejects an empty scenario list") {
  CHECK_THROWS_AS(solve_one_shot(fixture::two_bus(3), {}), ConfigError);
}

TEST_CASE("Benders on a linear instance brackets and closes on the LP optimum") {
  const auto inst = fixture::two_bus(4);
  const auto sc = two_bus_scenarios(4);
  const auto os = solve_one_shot(inst, sc);
  BendersConfig cfg;
  cfg.epsilon = 1e-6;
  cfg.stall_tolerance = 0.0;
  const auto r = run_benders(inst, sc, cfg);
  CHECK(r.stop_reason == "gap");
  CHECK(r.gap() <= 1e-6);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& h : r.history) {
    best = std::min(best, h.upper);
    CHECK(h.lower <= os.objective * (1.0 + 1e-9) + 1e-9);
    CHECK(h.lower <= best + 1e-7 * std::abs(best));
  }
  CHECK(r.upper == doctest::Approx(os.objective).epsilon(1e-6));
  CHECK(evaluate(inst, r.x, sc).value == doctest::Approx(os.objective).epsilon(1e-6));
}

TEST_CASE("Benders with one scenario reaches the LP optimum") {
  const auto inst = fixture::two_bus(3);
  const auto sc = two_bus_scenarios(3);
  const auto os = solve_one_shot(inst, {sc[1]});
  const auto quick = run_benders(inst, {sc[1]});
  CHECK(quick.stop_reason == "gap");
  CHECK(quick.upper <= os.objective * 1.01);
  // Cutting planes on a polyhedral recourse terminate exactly, well inside the
  // iteration budget (26 cuts here: the shedding penalty makes early cuts steep).
  BendersConfig cfg;
  cfg.epsilon = 1e-8;
  cfg.stall_tolerance = 0.0;
  const auto r = run_benders(inst, {sc[1]}, cfg);
  CHECK(r.stop_reason == "gap");
  CHECK(r.iterations <= 30);
  CHECK(r.upper == doctest::Approx(os.objective).epsilon(1e-7));
}

TEST_CASE("Benders cuts are tight where generated and valid elsewhere") {
  const auto inst = fixture::two_bus(4);
  const auto sc = two_bus_scenarios(4);
  BendersConfig cfg;
  cfg.max_iterations = 6;
  const auto r = run_benders(inst, sc, cfg);
  REQUIRE(!r.cuts.empty());
  auto backend = make_revised_simplex();
  for (const auto& cut : r.cuts) {
    const auto g = solve_subproblem(inst, cut.point, sc[cut.scenario], SubproblemConfig{}, *backend);
    CHECK(cut.evaluate(cut.point) == doctest::Approx(g.objective).epsilon(1e-9));
  }
  std::mt19937_64 rng(11);
  for (int k = 0; k < 10; ++k) {
    const auto x = fixture::random_dispatch(inst, rng);
    for (const auto& cut : r.cuts) {
      const auto g = solve_subproblem(inst, x, sc[cut.scenario], SubproblemConfig{}, *backend);
      CHECK(cut.evaluate(x) <= g.objective + 1e-7 * std::max(1.0, std::abs(g.objective)));
    }
  }
}

TEST_CASE("Benders settings are validated") {
  BendersConfig c;
  c.epsilon = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = BendersConfig{};
  c.max_iterations = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(run_benders(fixture::two_bus(3), {}, BendersConfig{}), ConfigError);
}

TEST_CASE("OPF-only without GFPPs matches the coupled one-shot") {
  auto inst = fixture::micro();
  inst.coupling.gfpps.clear();
  inst.finalize();
  const auto set = fixture::micro_scenarios();
  const std::vector<Scenario> two{set.scenarios[1], set.scenarios[6]};
  const auto full = solve_one_shot(inst, two);
  const auto opf = solve_opf_only(inst, two);
  REQUIRE(full.converged);
  REQUIRE(opf.converged);
  // The gas block no longer depends on x; the dispatch is equally good.
  CHECK(evaluate(inst, opf.x, two).value == doctest::Approx(full.objective).epsilon(1e-6));
  CHECK(solve_opf_only(inst, two).x == opf.x);
}

TEST_CASE("stressed OPF dispatch leans harder on gas units") {
  const auto inst = apply_cost_stress(fixture::micro(), {0.25, 2.0});
  const auto set = fixture::micro_scenarios();
  const auto opf = solve_opf_only(inst, set.training_set());
  const auto opgf = solve_one_shot(inst, set.training_set());
  const auto a = evaluate(inst, opf.x, set.training_set());
  const auto b = evaluate(inst, opgf.x, set.training_set());
  CHECK(a.first_stage_gfpp_energy >= b.first_stage_gfpp_energy);
  CHECK(b.value <= a.value * (1.0 + 1e-6));
}

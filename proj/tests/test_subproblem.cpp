#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "gesha/errors.hpp"
#include "gesha/linearization.hpp"
#include "gesha/lp_backend.hpp"
#include "gesha/slp.hpp"
#include "gesha/stage_builders.hpp"
#include "gesha/subproblem.hpp"

using namespace gesha;

namespace {

double friction_value(double m, double pi, double vf, double eps) { return vf * fixture::phi(m, eps) / pi; }

std::vector<double> mid_dispatch(const Instance& inst) {
  std::vector<double> x(static_cast<std::size_t>(inst.num_x()));
  for (int g = 0; g < inst.num_generators(); ++g) {
    const auto& gen = inst.electric.generators[g];
    for (int t = 0; t < inst.num_steps(); ++t) x[inst.x_index(g, t)] = 0.5 * (gen.pmin + gen.pmax);
  }
  return x;
}

}  // namespace

TEST_CASE("friction linearization: closed-form point") {
  const auto l = linearize_friction(2.0, 4.0, 1.0, 1e-14);
  CHECK(l.value == doctest::Approx(1.0));
  CHECK(l.d_first == doctest::Approx(1.0));
  CHECK(l.d_second == doctest::Approx(-0.25));
}

TEST_CASE("friction linearization at zero flow") {
  const double eps = 1e-4;
  const auto l = linearize_friction(0.0, 5.0, 3.0, eps);
  CHECK(l.value == 0.0);
  CHECK(l.d_first == doctest::Approx(3.0 * std::sqrt(eps) / 5.0));
  CHECK(l.d_second == 0.0);
  CHECK_THROWS_AS(linearize_friction(1.0, 0.0, 1.0, eps), SolverError);
  CHECK_THROWS_AS(linearize_friction(1.0, -2.0, 1.0, eps), SolverError);
}

TEST_CASE("friction linearization matches central differences") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> m(-50.0, 50.0), pi(2e6, 7e6), vf(1e5, 1e9);
  for (int k = 0; k < 200; ++k) {
    const double mh = m(rng), ph = pi(rng), v = vf(rng), eps = 1e-2;
    const auto l = linearize_friction(mh, ph, v, eps);
    const double hm = 1e-5 * (1.0 + std::abs(mh));
    const double hp = 1e-5 * ph;
    const double dm = (friction_value(mh + hm, ph, v, eps) - friction_value(mh - hm, ph, v, eps)) / (2 * hm);
    const double dp = (friction_value(mh, ph + hp, v, eps) - friction_value(mh, ph - hp, v, eps)) / (2 * hp);
    CHECK(l.value == doctest::Approx(friction_value(mh, ph, v, eps)).epsilon(1e-12));
    CHECK(l.d_first == doctest::Approx(dm).epsilon(1e-6));
    CHECK(l.d_second == doctest::Approx(dp).epsilon(1e-6));
  }
}

TEST_CASE("compressor linearization") {
  // Pass-through unit: the row is exact.
  const auto pass = linearize_compressor(1.0, 5e6);
  CHECK(pass.value == 5e6);
  CHECK(pass.d_first == 5e6);
  CHECK(pass.d_second == 1.0);
  // Bilinear remainder is exactly the product of the two steps.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> k(1.0, 1.6), p(1e6, 7e6), d(-0.1, 0.1);
  for (int i = 0; i < 100; ++i) {
    const double kh = k(rng), ph = p(rng), dk = d(rng), dp = d(rng) * 1e6;
    const auto l = linearize_compressor(kh, ph);
    const double model = l.value + l.d_first * dk + l.d_second * dp;
    CHECK((kh + dk) * (ph + dp) - model == doctest::Approx(dk * dp).epsilon(1e-6).scale(1e6));
    // Central differences of kappa * pi are exact up to round-off.
    const double h = 1e-4;
    CHECK(l.d_first == doctest::Approx(((kh + h) * ph - (kh - h) * ph) / (2 * h)).epsilon(1e-8));
    CHECK(l.d_second == doctest::Approx((kh * (ph + h * ph) - kh * (ph - h * ph)) / (2 * h * ph)).epsilon(1e-8));
  }
}

TEST_CASE("stored terms carry their coefficient") {
  NonlinearTerm t;
  t.kind = NonlinearKind::kBilinear;
  t.first = 0;
  t.second = 1;
  t.coef = -1.0;
  const std::vector<double> z{1.2, 4e6};
  const auto l = linearize(t, z);
  CHECK(l.value == doctest::Approx(-4.8e6));
  CHECK(l.d_first == doctest::Approx(-4e6));
  CHECK(l.d_second == doctest::Approx(-1.2));
  CHECK(nonlinear_value(t, z) == doctest::Approx(-4.8e6));
}

TEST_CASE("gas-free instance reduces to one LP whose duals are lambda") {
  const auto inst = fixture::two_bus(4);
  const auto x = mid_dispatch(inst);
  const auto sc = fixture::flat_scenario("s", 4, 0.6);
  auto backend = make_revised_simplex();
  const auto r = solve_subproblem(inst, x, sc, SubproblemConfig{}, *backend);
  CHECK(r.converged);
  CHECK(r.slp_iterations == 1);
  auto st = build_second_stage(inst, x, sc);
  const auto lp = solve_lp(st.system, *backend);
  REQUIRE(lp.optimal());
  CHECK(r.objective == doctest::Approx(lp.objective));
  const auto lambda = fix_link_duals(st.system, lp, inst.num_x());
  REQUIRE(r.lambda.size() == lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) CHECK(r.lambda[i] == doctest::Approx(lambda[i]));
}

TEST_CASE("steady balanced gas line: the steady start is already optimal") {
  auto inst = fixture::gas_line({40000.0, 20000.0}, 40.0, 4);
  inst.gas.supplies[0].smin = inst.gas.supplies[0].smax = 40.0;
  inst.finalize();
  const std::vector<double> x;
  const auto sc = fixture::flat_scenario("s", 4, 0.0);
  auto st = build_second_stage(inst, x, sc);
  auto backend = make_revised_simplex();
  const auto start = steady_state_warm_start(inst, x, st, SlpConfig{}, *backend);
  const auto res = solve_slp(st.system, SlpConfig{}, *backend, &start);
  REQUIRE(res.converged);
  double step = 0.0;
  for (int j = 0; j < st.system.num_variables(); ++j) {
    step = std::max(step, std::abs(res.z[j] - start.z[j]) / st.system.variables()[j].scale);
  }
  CHECK(step <= 1e-6);
  CHECK(st.system.max_nonlinear_residual(start.z) <= 1e-6);
}

TEST_CASE("steady state: zero demand gives zero flow at the reference pressure") {
  const auto inst = fixture::gas_line({30000.0, 30000.0}, 0.0, 2);
  auto backend = make_revised_simplex();
  const auto s = steady_gas_state(inst, {0.0, 0.0, 0.0}, SlpConfig{}, *backend);
  REQUIRE(s.converged);
  for (double m : s.m) CHECK(std::abs(m) <= 1e-9);
  for (double p : s.pi) CHECK(p == doctest::Approx(6e6).epsilon(1e-12));
}

TEST_CASE("steady state: single pipe carries the demand") {
  const auto inst = fixture::gas_line({50000.0}, 0.0, 2);
  auto backend = make_revised_simplex();
  const auto s = steady_gas_state(inst, {0.0, 35.0}, SlpConfig{}, *backend);
  REQUIRE(s.converged);
  REQUIRE(s.m.size() == 3);
  for (double m : s.m) CHECK(m == doctest::Approx(35.0).epsilon(1e-9));
  CHECK(s.supply[0] == doctest::Approx(35.0).epsilon(1e-9));
}

TEST_CASE("steady state: three-node line matches a root finder") {
  const auto inst = fixture::gas_line({30000.0, 45000.0}, 0.0, 2);
  auto backend = make_revised_simplex();
  // 20 kg/s taken in the middle, 30 kg/s at the end.
  const auto s = steady_gas_state(inst, {0.0, 20.0, 30.0}, SlpConfig{}, *backend);
  REQUIRE(s.converged);
  const auto& d = inst.discretized;
  const double eps = SlpConfig{}.smoothing * std::pow(gas_flow_scale(inst), 2);
  std::vector<double> pi(static_cast<std::size_t>(d.num_nodes()), 0.0);
  pi[0] = 6e6;
  const double flow[] = {50.0, 30.0};
  for (int p = 0; p < 2; ++p) {
    for (int sp : d.pipe_chain[p]) {
      const auto& sub = d.subpipes[sp];
      const double k = sub.dx * sub.constants.vf / sub.constants.vp;
      pi[sub.to] = fixture::steady_outlet_pressure(pi[sub.from], flow[p], k, eps);
      CHECK(s.m[sp] == doctest::Approx(flow[p]).epsilon(1e-9));
    }
  }
  for (int n = 0; n < d.num_nodes(); ++n) CHECK(std::abs(s.pi[n] - pi[n]) / 6e6 <= 1e-6);
}

TEST_CASE("micro subproblem: residuals, objective identity and conservation") {
  const auto inst = fixture::micro();
  const auto set = fixture::micro_scenarios();
  const auto x = mid_dispatch(inst);
  auto backend = make_revised_simplex();
  for (int s : {0, 5}) {
    const auto& sc = set.scenarios[s];
    const auto r = solve_subproblem(inst, x, sc, SubproblemConfig{}, *backend);
    REQUIRE(r.converged);
    CHECK(r.max_residual <= 1e-6);
    const auto st = build_second_stage(inst, x, sc);
    const auto& z = r.warm.z;
    CHECK(st.system.objective(z) == doctest::Approx(r.objective).epsilon(1e-6));
    CHECK(r.recourse.total() == doctest::Approx(r.objective).epsilon(1e-6));
    CHECK(r.lambda.size() == x.size());

    // Net injection per step equals the linepack rate of the subpipes.
    const auto& g = st.layout.gas;
    const auto& d = inst.discretized;
    const int T = inst.num_steps();
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
      CHECK(std::abs(injection - pack) <= 1e-8 * gas_flow_scale(inst));
    }
  }
}

TEST_CASE("concurrent solves are reentrant and deterministic") {
  const auto inst = fixture::micro();
  const auto set = fixture::micro_scenarios();
  const auto x = mid_dispatch(inst);
  const int n = static_cast<int>(set.scenarios.size());
  auto run = [&](int workers) {
    std::vector<double> out(static_cast<std::size_t>(n));
    parallel_for(n, workers, [&](int i) {
      auto backend = make_revised_simplex();
      out[i] = solve_subproblem(inst, x, set.scenarios[i], SubproblemConfig{}, *backend).objective;
    });
    return out;
  };
  CHECK(run(1) == run(3));
}

TEST_CASE("SLP settings are validated") {
  SlpConfig c;
  CHECK_NOTHROW(c.validate());
  c.shrink = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SlpConfig{};
  c.smoothing = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SlpConfig{};
  c.grow = 0.9;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

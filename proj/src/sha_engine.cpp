#include "gesha/sha_engine.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <map>

#include "gesha/errors.hpp"
#include "gesha/evaluator.hpp"
#include "gesha/stage_builders.hpp"

namespace gesha {

std::string_view to_string(ShaVariant v) {
  switch (v) {
    case ShaVariant::kConvex:
      return "shacv";
    case ShaVariant::kCertaintyEquivalent:
      return "shace";
    case ShaVariant::kExtremaEquivalent:
      return "shaxe";
  }
  return "?";
}

ShaVariant parse_variant(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "shacv") return ShaVariant::kConvex;
  if (s == "shace") return ShaVariant::kCertaintyEquivalent;
  if (s == "shaxe") return ShaVariant::kExtremaEquivalent;
  throw ConfigError("unknown SHA variant '" + std::string(name) + "'");
}

std::string_view to_string(GradientSource s) {
  return s == GradientSource::kMaster ? "master" : "subproblem";
}

GradientSource parse_gradient_source(std::string_view name) {
  if (name == "subproblem") return GradientSource::kSubproblem;
  if (name == "master") return GradientSource::kMaster;
  throw ConfigError("q0 source must be 'subproblem' or 'master', got '" + std::string(name) + "'");
}

Window Window::fixed(int n) {
  if (n < 1) throw ConfigError("averaging window must be at least 1");
  return {Kind::kFixed, n};
}

int Window::first(int nu) const {
  switch (kind) {
    case Kind::kFixed:
      return std::max(1, nu - length + 1);
    case Kind::kHalf:
      return std::max(1, nu - std::max(1, nu / 2) + 1);
    case Kind::kInfinite:
      break;
  }
  return 1;
}

std::string Window::label() const {
  switch (kind) {
    case Kind::kFixed:
      return std::to_string(length);
    case Kind::kHalf:
      return "half";
    case Kind::kInfinite:
      break;
  }
  return "inf";
}

Window parse_window(std::string_view text) {
  std::string s(text);
  if (s == "inf" || s == "infinite" || s == "all") return Window::infinite();
  if (s == "half" || s == "nu/2") return Window::half();
  try {
    std::size_t used = 0;
    const long n = std::stol(s, &used);
    if (used == s.size()) return Window::fixed(static_cast<int>(n));
  } catch (const std::logic_error&) {
  }
  throw ConfigError("averaging window must be 'inf', 'half' or a positive integer, got '" + s + "'");
}

void ShaConfig::validate() const {
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  if (variant == ShaVariant::kConvex && !(a > 0.0)) throw ConfigError("SHACV needs a > 0");
  if (window.kind == Window::Kind::kFixed && window.length < 1) throw ConfigError("window must be >= 1");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (!(time_limit > 0.0)) throw ConfigError("time limit must be positive");
  if (!(master_tolerance > 0.0)) throw ConfigError("master tolerance must be positive");
  if (evaluation_interval < 0) throw ConfigError("evaluation interval must be non-negative");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  subproblem.slp.validate();
}

double step_size(int nu, double rho) {
  if (nu < 1) throw ConfigError("iteration counter starts at 1");
  if (!(rho > 0.0)) throw ConfigError("rho must be positive");
  return rho / static_cast<double>(nu);
}

std::vector<double> sha_update(std::span<const double> lambda_bar, std::span<const double> lambda,
                               std::span<const double> q0, double alpha) {
  if (lambda.size() != lambda_bar.size() || q0.size() != lambda_bar.size()) {
    throw ConfigError("sha_update: dimension mismatch");
  }
  if (!(alpha > 0.0)) throw ConfigError("sha_update: step must be positive");
  std::vector<double> out(lambda_bar.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = lambda_bar[i] + alpha * (lambda[i] - (q0[i] + lambda_bar[i]));
  }
  return out;
}

std::vector<double> calibrate_b(double a, std::span<const double> x, std::span<const double> lambda) {
  if (x.size() != lambda.size()) throw ConfigError("calibrate_b: dimension mismatch");
  std::vector<double> b(x.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = lambda[i] - 2.0 * a * x[i];
  return b;
}

double solution_update_metric(std::span<const double> x_bar, std::span<const double> x_prev) {
  if (x_bar.size() != x_prev.size()) throw ConfigError("solution_update_metric: dimension mismatch");
  double diff = 0.0;
  double norm = 0.0;
  for (std::size_t i = 0; i < x_bar.size(); ++i) {
    diff += (x_bar[i] - x_prev[i]) * (x_bar[i] - x_prev[i]);
    norm += x_bar[i] * x_bar[i];
  }
  diff = std::sqrt(diff);
  return norm > 0.0 ? diff / std::sqrt(norm) : diff;
}

void IterateAverage::push(std::span<const double> x, double alpha) {
  ++count_;
  const double w = 1.0 / alpha;
  if (window_.kind == Window::Kind::kInfinite) {
    if (sum_wx_.empty()) sum_wx_.assign(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) sum_wx_[i] += w * x[i];
    sum_w_ += w;
    return;
  }
  kept_.emplace_back(std::vector<double>(x.begin(), x.end()), w);
  const std::size_t keep = static_cast<std::size_t>(count_ - window_.first(count_) + 1);
  // A half window only ever grows by one per two iterations, so dropping
  // from the front keeps exactly the iterates it needs.
  while (kept_.size() > keep) kept_.pop_front();
}

std::vector<double> IterateAverage::average() const {
  if (window_.kind == Window::Kind::kInfinite) {
    std::vector<double> out(sum_wx_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = sum_wx_[i] / sum_w_;
    return out;
  }
  if (kept_.empty()) return {};
  std::vector<double> out(kept_.front().first.size(), 0.0);
  double sw = 0.0;
  for (const auto& [x, w] : kept_) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * x[i];
    sw += w;
  }
  for (auto& v : out) v /= sw;
  return out;
}

std::vector<double> weighted_average(const std::vector<std::vector<double>>& xs,
                                     const std::vector<double>& alphas, Window window) {
  if (xs.empty() || xs.size() != alphas.size()) throw ConfigError("weighted_average: need one alpha per iterate");
  const int nu = static_cast<int>(xs.size());
  std::vector<double> out(xs.front().size(), 0.0);
  double sw = 0.0;
  for (int i = window.first(nu); i <= nu; ++i) {
    const double w = 1.0 / alphas[i - 1];
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += w * xs[i - 1][k];
    sw += w;
  }
  for (auto& v : out) v /= sw;
  return out;
}

double ConvexModel::value(std::span<const double> x) const {
  double q = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double u = x[i] / base;
    q += a * u * u + b[i] * u;
  }
  return q;
}

std::vector<double> ConvexModel::gradient(std::span<const double> x) const {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = (2.0 * a * x[i] / base + b[i]) / base;
  return g;
}

ConvexMaster::ConvexMaster(const Instance& inst, ConvexModel model, LpBackend& backend, double tolerance)
    : inst_(inst), model_(std::move(model)), backend_(backend), tolerance_(tolerance) {
  lp_ = build_first_stage(inst);
  base_rows_ = lp_.num_rows();
  const int n = inst.num_x();
  if (static_cast<int>(model_.b.size()) != n) throw ConfigError("convex model has the wrong dimension");
  for (int i = 0; i < n; ++i) {
    epi_.push_back(lp_.add_variable("q0[" + std::to_string(i) + "]", -kInf, kInf, 1.0,
                                    std::max(1.0, std::abs(model_.a))));
  }
  for (int i = 0; i < n; ++i) {
    const auto& v = lp_.variables()[i];
    add_cut(i, v.lower);
    add_cut(i, v.upper);
    add_cut(i, 0.5 * (v.lower + v.upper));
  }
}

void ConvexMaster::add_cut(int i, double x) {
  const double u = x / model_.base;
  const double q = model_.a * u * u + model_.b[i] * u;
  const double slope = (2.0 * model_.a * u + model_.b[i]) / model_.base;
  lp_.add_row("cut", q - slope * x, kInf, {{epi_[i], 1.0}, {i, -slope}});
  if (basis_) basis_->rows.push_back(BasisStatus::kBasic);
}

int ConvexMaster::num_cuts() const { return lp_.num_rows() - base_rows_; }

MasterSolution ConvexMaster::solve(std::span<const double> lambda_bar) {
  const int n = inst_.num_x();
  const double hours = inst_.time.hours();
  for (int g = 0; g < inst_.num_generators(); ++g) {
    for (int t = 0; t < inst_.num_steps(); ++t) {
      const int i = inst_.x_index(g, t);
      lp_.variables()[i].cost = inst_.electric.generators[g].cost * hours + lambda_bar[i];
    }
  }
  MasterSolution out;
  for (int round = 0; round < 200; ++round) {
    LpWarmStart warm;
    warm.basis = basis_;
    const auto sol = backend_.solve(lp_, &warm);
    if (!sol.optimal()) {
      throw SolverError(std::string("convex master LP ") + std::string(to_string(sol.status)));
    }
    basis_ = sol.basis;
    out.x.assign(sol.primal.begin(), sol.primal.begin() + n);
    double gap = 0.0;
    std::vector<int> violated;
    for (int i = 0; i < n; ++i) {
      const double u = out.x[i] / model_.base;
      const double err = model_.a * u * u + model_.b[i] * u - sol.primal[epi_[i]];
      gap += std::max(0.0, err);
      if (err > 0.0) violated.push_back(i);
    }
    double s = model_.value(out.x);
    for (int i = 0; i < n; ++i) s += lp_.variables()[i].cost * out.x[i];
    out.objective = s;
    if (gap <= tolerance_ * (1.0 + std::abs(s))) return out;
    for (int i : violated) add_cut(i, out.x[i]);
  }
  out.converged = false;
  out.message = "cut refinement limit reached";
  return out;
}

RecourseMaster::RecourseMaster(const Instance& inst, const std::vector<Scenario>& scenarios,
                               const std::vector<double>& weights, const SubproblemConfig& config,
                               LpBackend& backend)
    : inst_(inst), config_(config), backend_(backend) {
  if (scenarios.empty() || scenarios.size() != weights.size()) {
    throw ConfigError("recourse master needs one weight per scenario");
  }
  sys_ = build_first_stage(inst);
  const int n = inst.num_x();
  for (int i = 0; i < n; ++i) base_cost_.push_back(sys_.variables()[i].cost);
  std::vector<int> x_cols(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x_cols[i] = i;

  // Start from the cheapest first-stage schedule with every recourse copy
  // solved at it. The master matrix is block triangular in (x, copies), so
  // the first-stage basis and the copies' bases together form a basis.
  const auto first = backend.solve(sys_);
  if (!first.optimal()) throw SolverError("first-stage LP " + std::string(to_string(first.status)));
  const std::vector<double> x0(first.primal.begin(), first.primal.begin() + n);
  warm_.z = x0;
  LpBasis basis = first.basis;
  std::vector<BasisStatus> elastic_status;
  bool have_basis = true;

  SecondStageOptions sopt;
  sopt.include_gas = config.include_gas;
  sopt.smoothing = config.slp.smoothing;
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    const auto stage = build_second_stage(inst, x0, scenarios[k], sopt);
    const auto before = sys_.fix_links().size();
    sys_.append(stage.system, weights[k]);
    const std::vector<FixLink> links(sys_.fix_links().begin() + static_cast<std::ptrdiff_t>(before),
                                     sys_.fix_links().end());
    sys_.link_fix_rows(links, x_cols);

    const int nk = stage.system.num_variables();
    const int mk = stage.system.num_rows();
    std::optional<SlpStart> start;
    try {
      start = solve_subproblem(inst, x0, scenarios[k], config, backend).warm;
    } catch (const SolverError&) {
    }
    if (!start || static_cast<int>(start->z.size()) != nk) {
      start = stage.system.is_linear() ? SlpStart{default_start(stage.system), std::nullopt}
                                       : steady_state_warm_start(inst, x0, stage, config.slp, backend);
    }
    warm_.z.insert(warm_.z.end(), start->z.begin(), start->z.end());
    const auto& bk = start->basis;
    if (have_basis && bk && static_cast<int>(bk->rows.size()) == mk &&
        static_cast<int>(bk->columns.size()) >= nk) {
      basis.columns.insert(basis.columns.end(), bk->columns.begin(), bk->columns.begin() + nk);
      elastic_status.insert(elastic_status.end(), bk->columns.begin() + nk, bk->columns.end());
      basis.rows.insert(basis.rows.end(), bk->rows.begin(), bk->rows.end());
    } else {
      have_basis = false;
    }
  }
  if (have_basis) {
    basis.columns.insert(basis.columns.end(), elastic_status.begin(), elastic_status.end());
    warm_.basis = std::move(basis);
  }
}

MasterSolution RecourseMaster::solve(std::span<const double> lambda_bar) {
  const int n = inst_.num_x();
  for (int i = 0; i < n; ++i) sys_.variables()[i].cost = base_cost_[i] + lambda_bar[i];
  const auto res = solve_slp(sys_, config_.slp, backend_, &warm_);
  if (res.z.empty()) throw SolverError("recourse master: " + res.message);
  warm_.z = res.z;
  warm_.basis = res.basis;
  last_iterations_ = res.iterations;
  MasterSolution out;
  out.x.assign(res.z.begin(), res.z.begin() + n);
  out.objective = res.objective;
  out.model_gradient = fix_link_duals(sys_, res.final_lp, n);
  out.converged = res.converged;
  out.message = res.message;
  return out;
}

namespace {

struct SolveTask {
  int scenario = -1;  // index into set.scenarios, -1 for the mean scenario
  double weight = 1.0;
};

}  // namespace

ShaResult run_sha(const Instance& inst, const ScenarioSet& set, const ShaConfig& cfg) {
  cfg.validate();
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  const auto seconds = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  const int n = inst.num_x();
  const Scenario mean = set.expectation();
  const auto ext = extrema(set);
  auto backend = make_lp_backend(cfg.subproblem.backend);

  std::vector<SolveTask> q0_tasks;
  std::unique_ptr<ConvexMaster> convex;
  std::unique_ptr<RecourseMaster> recourse;
  switch (cfg.variant) {
    case ShaVariant::kConvex: {
      // Calibrate b so the CE dispatch is stationary for Q0 with zero correction.
      // The CE master's own link duals are the subgradient that certifies x_CE;
      // a fresh solve at a kink may return another one.
      RecourseMaster ce(inst, {mean}, {1.0}, cfg.subproblem, *backend);
      const std::vector<double> zero(static_cast<std::size_t>(n), 0.0);
      const auto ces = ce.solve(zero);
      std::vector<double> lambda_ce = ces.model_gradient;
      if (cfg.q0_source == GradientSource::kSubproblem) {
        lambda_ce = solve_subproblem(inst, ces.x, mean, cfg.subproblem, *backend).lambda;
      }
      ConvexModel model;
      model.a = cfg.a;
      model.base = inst.electric.base_mva;
      std::vector<double> xpu(ces.x), lpu(lambda_ce);
      for (auto& v : xpu) v /= model.base;
      for (auto& v : lpu) v *= model.base;
      model.b = calibrate_b(cfg.a, xpu, lpu);
      convex = std::make_unique<ConvexMaster>(inst, model, *backend, cfg.master_tolerance);
      break;
    }
    case ShaVariant::kCertaintyEquivalent:
      recourse = std::make_unique<RecourseMaster>(inst, std::vector<Scenario>{mean},
                                                  std::vector<double>{1.0}, cfg.subproblem, *backend);
      q0_tasks.push_back({-1, 1.0});
      break;
    case ShaVariant::kExtremaEquivalent:
      recourse = std::make_unique<RecourseMaster>(
          inst, std::vector<Scenario>{set.scenarios[ext.max_index], set.scenarios[ext.min_index]},
          std::vector<double>{0.5, 0.5}, cfg.subproblem, *backend);
      q0_tasks.push_back({ext.max_index, 0.5});
      q0_tasks.push_back({ext.min_index, 0.5});
      break;
  }

  const auto order = iteration_order(set, cfg.max_iterations, cfg.seed);
  std::map<int, SlpStart> warm;  // per scenario index, -1 = mean
  std::vector<std::unique_ptr<LpBackend>> task_backends;
  for (int k = 0; k < 3; ++k) task_backends.push_back(make_lp_backend(cfg.subproblem.backend));

  ShaResult result;
  result.lambda_bar.assign(static_cast<std::size_t>(n), 0.0);
  IterateAverage avg(cfg.window);
  std::vector<double> x_bar_prev;
  const auto training = set.training_set();
  result.stop_reason = "iteration_limit";

  for (int nu = 1; nu <= cfg.max_iterations; ++nu) {
    if (seconds() > cfg.time_limit) {
      result.stop_reason = "time_limit";
      break;
    }
    const auto master = convex ? convex->solve(result.lambda_bar) : recourse->solve(result.lambda_bar);
    const auto& x = master.x;

    std::vector<SolveTask> tasks{{order[nu - 1], 1.0}};
    if (cfg.q0_source == GradientSource::kSubproblem) {
      tasks.insert(tasks.end(), q0_tasks.begin(), q0_tasks.end());
    }
    std::vector<SubproblemResult> solved(tasks.size());
    std::vector<char> failed(tasks.size(), 0);
    // The sampled scenario may coincide with an extremum; give each task its
    // own warm start copy so the solves are independent.
    std::vector<SlpStart> starts(tasks.size());
    std::vector<char> has_start(tasks.size(), 0);
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      const auto it = warm.find(tasks[k].scenario);
      if (it != warm.end()) {
        starts[k] = it->second;
        has_start[k] = 1;
      }
    }
    parallel_for(static_cast<int>(tasks.size()), cfg.workers, [&](int k) {
      const auto& sc = tasks[k].scenario < 0 ? mean : set.scenarios[tasks[k].scenario];
      try {
        solved[k] = solve_subproblem(inst, x, sc, cfg.subproblem, *task_backends[k],
                                     has_start[k] ? &starts[k] : nullptr);
      } catch (const SolverError&) {
        failed[k] = 1;
      }
    });
    bool flagged = false;
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      if (failed[k]) {
        flagged = true;
        warm.erase(tasks[k].scenario);
      } else {
        warm[tasks[k].scenario] = solved[k].warm;
      }
    }

    const double alpha = step_size(nu, cfg.rho);
    if (!flagged) {
      std::vector<double> q0(static_cast<std::size_t>(n), 0.0);
      if (convex) {
        q0 = convex->model().gradient(x);
      } else if (cfg.q0_source == GradientSource::kMaster) {
        q0 = master.model_gradient;
      } else {
        for (std::size_t k = 1; k < tasks.size(); ++k) {
          for (int i = 0; i < n; ++i) q0[i] += tasks[k].weight * solved[k].lambda[i];
        }
      }
      result.lambda_bar = sha_update(result.lambda_bar, solved[0].lambda, q0, alpha);
    }
    avg.push(x, alpha);
    result.x_bar = avg.average();
    result.x_last = x;

    ShaRecord rec;
    rec.nu = nu;
    rec.scenario = set.scenarios[order[nu - 1]].name;
    rec.master_objective = master.objective;
    rec.flagged = flagged;
    if (!x_bar_prev.empty()) rec.delta = solution_update_metric(result.x_bar, x_bar_prev);
    if (cfg.evaluation_interval > 0 && nu % cfg.evaluation_interval == 0) {
      EvaluateOptions eo;
      eo.subproblem = cfg.subproblem;
      eo.workers = cfg.workers;
      rec.value = evaluate(inst, result.x_bar, training, eo).value;
    }
    rec.wall = seconds();
    result.history.push_back(rec);
    result.iterations = nu;
    x_bar_prev = result.x_bar;
    if (nu >= cfg.min_iterations && std::isfinite(rec.delta) && rec.delta <= cfg.tolerance) {
      result.stop_reason = "tolerance";
      break;
    }
  }
  return result;
}

}  // namespace gesha

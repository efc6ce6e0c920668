#include <algorithm>
#include <cmath>

#include "lp_internal.hpp"

namespace gesha::detail {

namespace {

double pow2_round(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) return 1.0;
  return std::exp2(std::round(std::log2(v)));
}

}  // namespace

ScaledLp build_scaled_lp(const ConstraintSystem& system) {
  ScaledLp lp;
  lp.m = system.num_rows();
  lp.n = system.num_variables();
  const auto& vars = system.variables();
  const auto& rows = system.rows();

  // Column-wise triplets.
  std::vector<int> count(static_cast<std::size_t>(lp.n), 0);
  for (const auto& row : rows) {
    for (const auto& e : row.entries) {
      if (e.value != 0.0) ++count[static_cast<std::size_t>(e.col)];
    }
  }
  lp.col_start.assign(static_cast<std::size_t>(lp.n) + 1, 0);
  for (int j = 0; j < lp.n; ++j) lp.col_start[j + 1] = lp.col_start[j] + count[j];
  lp.row_index.resize(static_cast<std::size_t>(lp.col_start[lp.n]));
  lp.value.resize(lp.row_index.size());
  std::vector<int> fill(lp.col_start.begin(), lp.col_start.end() - 1);
  for (int i = 0; i < lp.m; ++i) {
    for (const auto& e : rows[i].entries) {
      if (e.value == 0.0) continue;
      const int k = fill[e.col]++;
      lp.row_index[k] = i;
      lp.value[k] = e.value;
    }
  }

  // Column scale starts from the model's magnitude hints, then a few
  // geometric-mean passes (column factors clamped around the hint).
  lp.col_scale.resize(static_cast<std::size_t>(lp.n));
  for (int j = 0; j < lp.n; ++j) lp.col_scale[j] = pow2_round(vars[j].scale);
  lp.row_scale.assign(static_cast<std::size_t>(lp.m), 1.0);
  std::vector<double> hint = lp.col_scale;
  std::vector<double> rmin(static_cast<std::size_t>(lp.m));
  std::vector<double> rmax(static_cast<std::size_t>(lp.m));
  for (int pass = 0; pass < 6; ++pass) {
    std::fill(rmin.begin(), rmin.end(), kInf);
    std::fill(rmax.begin(), rmax.end(), 0.0);
    for (int j = 0; j < lp.n; ++j) {
      for (int k = lp.col_start[j]; k < lp.col_start[j + 1]; ++k) {
        const double a = std::abs(lp.value[k]) * lp.col_scale[j];
        const int i = lp.row_index[k];
        rmin[i] = std::min(rmin[i], a);
        rmax[i] = std::max(rmax[i], a);
      }
    }
    for (int i = 0; i < lp.m; ++i) {
      if (rmax[i] > 0.0) lp.row_scale[i] = 1.0 / std::sqrt(rmin[i] * rmax[i]);
    }
    for (int j = 0; j < lp.n; ++j) {
      double cmin = kInf;
      double cmax = 0.0;
      for (int k = lp.col_start[j]; k < lp.col_start[j + 1]; ++k) {
        const double a = std::abs(lp.value[k]) * lp.row_scale[lp.row_index[k]];
        cmin = std::min(cmin, a);
        cmax = std::max(cmax, a);
      }
      if (cmax > 0.0) {
        const double s = 1.0 / std::sqrt(cmin * cmax);
        lp.col_scale[j] = std::clamp(s, hint[j] / 8.0, hint[j] * 8.0);
      }
    }
  }
  // Final row pass: unit max-norm rows.
  std::fill(rmax.begin(), rmax.end(), 0.0);
  for (int j = 0; j < lp.n; ++j) {
    lp.col_scale[j] = pow2_round(lp.col_scale[j]);
    for (int k = lp.col_start[j]; k < lp.col_start[j + 1]; ++k) {
      const int i = lp.row_index[k];
      rmax[i] = std::max(rmax[i], std::abs(lp.value[k]) * lp.col_scale[j]);
    }
  }
  for (int i = 0; i < lp.m; ++i) lp.row_scale[i] = rmax[i] > 0.0 ? pow2_round(1.0 / rmax[i]) : 1.0;

  for (int j = 0; j < lp.n; ++j) {
    for (int k = lp.col_start[j]; k < lp.col_start[j + 1]; ++k) {
      lp.value[k] *= lp.row_scale[lp.row_index[k]] * lp.col_scale[j];
    }
  }

  const int total = lp.total();
  lp.lower.resize(static_cast<std::size_t>(total));
  lp.upper.resize(static_cast<std::size_t>(total));
  lp.cost.assign(static_cast<std::size_t>(total), 0.0);
  double cmax = 0.0;
  for (int j = 0; j < lp.n; ++j) {
    lp.lower[j] = vars[j].lower / lp.col_scale[j];
    lp.upper[j] = vars[j].upper / lp.col_scale[j];
    lp.cost[j] = vars[j].cost * lp.col_scale[j];
    cmax = std::max(cmax, std::abs(lp.cost[j]));
  }
  lp.cost_scale = cmax > 0.0 ? pow2_round(1.0 / cmax) : 1.0;
  for (int j = 0; j < lp.n; ++j) lp.cost[j] *= lp.cost_scale;
  for (int i = 0; i < lp.m; ++i) {
    lp.lower[lp.n + i] = rows[i].lower * lp.row_scale[i];
    lp.upper[lp.n + i] = rows[i].upper * lp.row_scale[i];
  }
  return lp;
}

double nonbasic_value(const ScaledLp& lp, int j, BasisStatus s) {
  switch (s) {
    case BasisStatus::kAtLower:
      return lp.lower[j];
    case BasisStatus::kAtUpper:
      return lp.upper[j];
    default:
      return 0.0;
  }
}

namespace {

BasisStatus default_status(const ScaledLp& lp, int j) {
  const bool lo = std::isfinite(lp.lower[j]);
  const bool up = std::isfinite(lp.upper[j]);
  if (lo) return BasisStatus::kAtLower;
  if (up) return BasisStatus::kAtUpper;
  return BasisStatus::kFree;
}

BasisStatus sanitize(const ScaledLp& lp, int j, BasisStatus s) {
  if (s == BasisStatus::kAtLower && !std::isfinite(lp.lower[j])) return default_status(lp, j);
  if (s == BasisStatus::kAtUpper && !std::isfinite(lp.upper[j])) return default_status(lp, j);
  if (s == BasisStatus::kFree && (std::isfinite(lp.lower[j]) || std::isfinite(lp.upper[j]))) {
    return default_status(lp, j);
  }
  return s;
}

}  // namespace

std::vector<BasisStatus> initial_states(const ScaledLp& lp, const LpWarmStart* warm,
                                        bool* has_basis) {
  const int total = lp.total();
  std::vector<BasisStatus> state(static_cast<std::size_t>(total));
  *has_basis = false;
  if (warm != nullptr && warm->basis && warm->basis->matches(lp.n, lp.m)) {
    int basic = 0;
    for (int j = 0; j < lp.n; ++j) state[j] = warm->basis->columns[j];
    for (int i = 0; i < lp.m; ++i) state[lp.n + i] = warm->basis->rows[i];
    for (int j = 0; j < total; ++j) {
      if (state[j] == BasisStatus::kBasic) {
        ++basic;
      } else {
        state[j] = sanitize(lp, j, state[j]);
      }
    }
    if (basic == lp.m) {
      *has_basis = true;
      return state;
    }
  }
  for (int j = 0; j < lp.n; ++j) {
    state[j] = default_status(lp, j);
    if (warm != nullptr && warm->primal.size() == static_cast<std::size_t>(lp.n)) {
      const double v = warm->primal[j] / lp.col_scale[j];
      const bool lo = std::isfinite(lp.lower[j]);
      const bool up = std::isfinite(lp.upper[j]);
      if (lo && up) {
        state[j] = (v - lp.lower[j] <= lp.upper[j] - v) ? BasisStatus::kAtLower
                                                        : BasisStatus::kAtUpper;
      }
    }
  }
  for (int i = 0; i < lp.m; ++i) state[lp.n + i] = BasisStatus::kBasic;
  return state;
}

LpSolution unscale(const ConstraintSystem& system, const ScaledLp& lp,
                   const ScaledResult& result) {
  LpSolution sol;
  sol.status = result.status;
  sol.iterations = result.iterations;
  sol.infeasible_row_hint = result.infeasible_row;
  if (result.x.empty()) return sol;
  sol.primal.resize(static_cast<std::size_t>(lp.n));
  sol.reduced_costs.resize(static_cast<std::size_t>(lp.n));
  for (int j = 0; j < lp.n; ++j) {
    sol.primal[j] = result.x[j] * lp.col_scale[j];
    // Snap onto bounds that the scaled solution sits on.
    const auto& v = system.variables()[j];
    if (result.state[j] == BasisStatus::kAtLower) sol.primal[j] = v.lower;
    if (result.state[j] == BasisStatus::kAtUpper) sol.primal[j] = v.upper;
    sol.reduced_costs[j] = result.d.empty() ? 0.0 : result.d[j] / (lp.col_scale[j] * lp.cost_scale);
  }
  sol.row_activity.resize(static_cast<std::size_t>(lp.m));
  sol.duals.assign(static_cast<std::size_t>(lp.m), 0.0);
  for (int i = 0; i < lp.m; ++i) {
    sol.row_activity[i] = result.x[lp.n + i] / lp.row_scale[i];
    if (!result.y.empty()) sol.duals[i] = result.y[i] * lp.row_scale[i] / lp.cost_scale;
  }
  sol.basis.columns.assign(result.state.begin(), result.state.begin() + lp.n);
  sol.basis.rows.assign(result.state.begin() + lp.n, result.state.end());
  sol.objective = system.objective(sol.primal);
  return sol;
}

}  // namespace gesha::detail

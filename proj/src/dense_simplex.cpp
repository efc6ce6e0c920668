// Dense bounded simplex with an explicit basis inverse and Bland's rule.
// Slow but simple; used on small systems and to cross-check the sparse code.

#include <Eigen/Dense>
#include <cmath>

#include "lp_internal.hpp"

namespace gesha {
namespace {

using detail::ScaledLp;
using detail::ScaledResult;

constexpr double kTol = 1e-9;

struct DenseSolver {
  const ScaledLp& lp;
  int m;
  int n;
  int total;
  Eigen::MatrixXd a;  // m x (n + m), logical columns are -I
  Eigen::MatrixXd binv;
  std::vector<BasisStatus> state;
  std::vector<int> head;
  std::vector<double> x;

  DenseSolver(const ScaledLp& l, std::vector<BasisStatus> s)
      : lp(l), m(l.m), n(l.n), total(l.total()), state(std::move(s)) {
    a = Eigen::MatrixXd::Zero(m, total);
    for (int j = 0; j < n; ++j) {
      for (int k = lp.col_start[j]; k < lp.col_start[j + 1]; ++k) a(lp.row_index[k], j) = lp.value[k];
    }
    for (int i = 0; i < m; ++i) a(i, n + i) = -1.0;
  }

  double tol(double b) const { return kTol * (1.0 + std::abs(b)); }
  bool below(int j) const { return x[j] < lp.lower[j] - tol(lp.lower[j]); }
  bool above(int j) const { return x[j] > lp.upper[j] + tol(lp.upper[j]); }

  bool invert() {
    head.clear();
    for (int j = 0; j < total; ++j) {
      if (state[j] == BasisStatus::kBasic) head.push_back(j);
    }
    if (static_cast<int>(head.size()) != m) return false;
    Eigen::MatrixXd b(m, m);
    for (int p = 0; p < m; ++p) b.col(p) = a.col(head[p]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
    if (!lu.isInvertible()) return false;
    binv = lu.inverse();
    return true;
  }

  void recompute() {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int j = 0; j < total; ++j) {
      if (state[j] == BasisStatus::kBasic) continue;
      x[j] = detail::nonbasic_value(lp, j, state[j]);
      rhs -= a.col(j) * x[j];
    }
    const Eigen::VectorXd xb = binv * rhs;
    for (int p = 0; p < m; ++p) x[head[p]] = xb[p];
  }

  void slack_basis() {
    for (int j = 0; j < n; ++j) {
      if (state[j] == BasisStatus::kBasic) {
        state[j] = std::isfinite(lp.lower[j])   ? BasisStatus::kAtLower
                   : std::isfinite(lp.upper[j]) ? BasisStatus::kAtUpper
                                                : BasisStatus::kFree;
      }
    }
    for (int i = 0; i < m; ++i) state[n + i] = BasisStatus::kBasic;
  }

  ScaledResult done(LpStatus status, int iterations, int hint) {
    ScaledResult r;
    r.status = status;
    r.iterations = iterations;
    r.infeasible_row = hint;
    r.x = x;
    r.state = state;
    r.y.assign(static_cast<std::size_t>(m), 0.0);
    r.d.assign(static_cast<std::size_t>(total), 0.0);
    if (status == LpStatus::kOptimal && m > 0) {
      Eigen::VectorXd cb(m);
      for (int p = 0; p < m; ++p) cb[p] = lp.cost[head[p]];
      const Eigen::VectorXd y = binv.transpose() * cb;
      for (int i = 0; i < m; ++i) r.y[i] = y[i];
      for (int j = 0; j < total; ++j) {
        if (state[j] != BasisStatus::kBasic) r.d[j] = lp.cost[j] - a.col(j).dot(y);
      }
    }
    return r;
  }

  ScaledResult run() {
    x.assign(static_cast<std::size_t>(total), 0.0);
    if (!invert()) {
      slack_basis();
      invert();
    }
    recompute();
    const int max_iterations = 200 * (m + n) + 1000;
    for (int it = 0; it < max_iterations; ++it) {
      if (it % 50 == 49) {
        if (!invert()) return done(LpStatus::kNumericalFailure, it, -1);
        recompute();
      }
      bool phase1 = false;
      Eigen::VectorXd cb(m);
      for (int p = 0; p < m; ++p) {
        const int j = head[p];
        cb[p] = below(j) ? -1.0 : above(j) ? 1.0 : 0.0;
        phase1 = phase1 || cb[p] != 0.0;
      }
      if (!phase1) {
        for (int p = 0; p < m; ++p) cb[p] = lp.cost[head[p]];
      }
      const Eigen::VectorXd y = binv.transpose() * cb;
      int q = -1;
      int dir = 0;
      for (int j = 0; j < total && q < 0; ++j) {
        const BasisStatus s = state[j];
        if (s == BasisStatus::kBasic || lp.upper[j] - lp.lower[j] <= 0.0) continue;
        const double dj = (phase1 ? 0.0 : lp.cost[j]) - a.col(j).dot(y);
        if ((s == BasisStatus::kAtLower || s == BasisStatus::kFree) && dj < -kTol) {
          q = j;
          dir = 1;
        } else if ((s == BasisStatus::kAtUpper || s == BasisStatus::kFree) && dj > kTol) {
          q = j;
          dir = -1;
        }
      }
      if (q < 0) {
        if (phase1) {
          int hint = -1;
          for (int p = 0; p < m && hint < 0; ++p) {
            if (head[p] >= n && (below(head[p]) || above(head[p]))) hint = head[p] - n;
          }
          return done(LpStatus::kInfeasible, it, hint);
        }
        return done(LpStatus::kOptimal, it, -1);
      }

      const Eigen::VectorXd alpha = binv * a.col(q);
      double theta = lp.upper[q] - lp.lower[q];
      if (!std::isfinite(theta)) theta = kInf;
      int leave = -1;
      double leave_target = 0.0;
      for (int p = 0; p < m; ++p) {
        if (std::abs(alpha[p]) < kTol) continue;
        const int j = head[p];
        const double rate = -dir * alpha[p];
        double target = 0.0;
        if (rate < 0.0) {
          if (phase1 && below(j)) continue;
          target = (phase1 && above(j)) ? lp.upper[j] : lp.lower[j];
        } else {
          if (phase1 && above(j)) continue;
          target = (phase1 && below(j)) ? lp.lower[j] : lp.upper[j];
        }
        if (!std::isfinite(target)) continue;
        const double ratio = std::max(0.0, (target - x[j]) / rate);
        if (ratio < theta - 1e-12 || (leave >= 0 && ratio <= theta + 1e-12 && j < head[leave])) {
          theta = ratio;
          leave = p;
          leave_target = target;
        }
      }
      if (!std::isfinite(theta)) {
        return done(phase1 ? LpStatus::kNumericalFailure : LpStatus::kUnbounded, it, -1);
      }
      for (int p = 0; p < m; ++p) x[head[p]] -= theta * dir * alpha[p];
      x[q] += dir * theta;
      if (leave < 0) {
        state[q] = dir > 0 ? BasisStatus::kAtUpper : BasisStatus::kAtLower;
        x[q] = dir > 0 ? lp.upper[q] : lp.lower[q];
        continue;
      }
      const int out = head[leave];
      x[out] = leave_target;
      state[out] = leave_target == lp.lower[out] ? BasisStatus::kAtLower : BasisStatus::kAtUpper;
      state[q] = BasisStatus::kBasic;
      head[leave] = q;
      // Rank-one update of the explicit inverse.
      const double piv = alpha[leave];
      const Eigen::RowVectorXd prow = binv.row(leave) / piv;
      for (int p = 0; p < m; ++p) {
        if (p != leave) binv.row(p) -= alpha[p] * prow;
      }
      binv.row(leave) = prow;
    }
    return done(LpStatus::kNumericalFailure, max_iterations, -1);
  }
};

class DenseSimplexBackend final : public LpBackend {
 public:
  [[nodiscard]] std::string_view name() const override { return "dense"; }
  LpSolution solve(const ConstraintSystem& system, const LpWarmStart* warm_start) override {
    const auto lp = detail::build_scaled_lp(system);
    bool has_basis = false;
    auto state = detail::initial_states(lp, warm_start, &has_basis);
    DenseSolver solver(lp, std::move(state));
    return detail::unscale(system, lp, solver.run());
  }
};

}  // namespace

std::unique_ptr<LpBackend> make_dense_simplex() {
  return std::make_unique<DenseSimplexBackend>();
}

}  // namespace gesha

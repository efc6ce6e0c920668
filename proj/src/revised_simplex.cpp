// Bounded-variable primal revised simplex.
//
// Basis factorization: Eigen sparse LU, refreshed every kRefactorEvery pivots;
// product-form eta updates in between. Phase 1 minimizes the sum of bound
// infeasibilities of basic variables (costs recomputed every iteration), so
// phase 1 and phase 2 share one loop. Ratio test is the two-pass Harris test;
// long runs of degenerate pivots switch pricing to Bland's rule until a
// non-degenerate step is taken.

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "gesha/errors.hpp"
#include "lp_internal.hpp"

namespace gesha {
namespace {

using detail::ScaledLp;
using detail::ScaledResult;

constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr int kRefactorEvery = 64;
constexpr int kDegenerateSwitch = 60;

double feas_tol(double bound) { return kPrimalTol * (1.0 + std::abs(bound)); }

class RevisedSimplexSolver {
 public:
  RevisedSimplexSolver(const ScaledLp& lp, std::vector<BasisStatus> state)
      : lp_(lp), m_(lp.m), n_(lp.n), total_(lp.total()), state_(std::move(state)) {}

  ScaledResult run();

 private:
  void slack_basis();
  bool factorize();
  void ftran(std::vector<double>& v) const;
  void btran(std::vector<double>& v) const;
  void load_column(int j, std::vector<double>& out) const;
  double column_dot(int j, const std::vector<double>& y) const;
  void compute_basic_values();
  double infeasibility(int j) const;
  ScaledResult finish(LpStatus status, int iterations, int infeasible_row);

  const ScaledLp& lp_;
  int m_;
  int n_;
  int total_;
  std::vector<BasisStatus> state_;
  std::vector<int> head_;
  std::vector<double> x_;
  mutable Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  struct Eta {
    int pos = 0;
    double pivot = 1.0;
    std::vector<int> idx;
    std::vector<double> val;
  };
  std::vector<Eta> etas_;
};

void RevisedSimplexSolver::slack_basis() {
  for (int j = 0; j < n_; ++j) {
    if (state_[j] == BasisStatus::kBasic) {
      state_[j] = std::isfinite(lp_.lower[j])   ? BasisStatus::kAtLower
                  : std::isfinite(lp_.upper[j]) ? BasisStatus::kAtUpper
                                                : BasisStatus::kFree;
    }
  }
  for (int i = 0; i < m_; ++i) state_[n_ + i] = BasisStatus::kBasic;
}

bool RevisedSimplexSolver::factorize() {
  head_.clear();
  for (int j = 0; j < total_; ++j) {
    if (state_[j] == BasisStatus::kBasic) head_.push_back(j);
  }
  if (static_cast<int>(head_.size()) != m_) return false;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m_) * 4);
  for (int p = 0; p < m_; ++p) {
    const int j = head_[p];
    if (j < n_) {
      for (int k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
        trip.emplace_back(lp_.row_index[k], p, lp_.value[k]);
      }
    } else {
      trip.emplace_back(j - n_, p, -1.0);
    }
  }
  Eigen::SparseMatrix<double> basis(m_, m_);
  basis.setFromTriplets(trip.begin(), trip.end());
  basis.makeCompressed();
  lu_.analyzePattern(basis);
  lu_.factorize(basis);
  etas_.clear();
  if (lu_.info() != Eigen::Success) return false;
  // SparseLU can report success on numerically rank-deficient bases.
  const double logdet = lu_.logAbsDeterminant();
  return std::isfinite(logdet);
}

void RevisedSimplexSolver::ftran(std::vector<double>& v) const {
  Eigen::Map<Eigen::VectorXd> rhs(v.data(), m_);
  Eigen::VectorXd sol = lu_.solve(rhs);
  rhs = sol;
  for (const auto& eta : etas_) {
    const double p = v[eta.pos] / eta.pivot;
    if (p != 0.0) {
      for (std::size_t k = 0; k < eta.idx.size(); ++k) v[eta.idx[k]] -= eta.val[k] * p;
    }
    v[eta.pos] = p;
  }
}

void RevisedSimplexSolver::btran(std::vector<double>& v) const {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    double s = v[it->pos];
    for (std::size_t k = 0; k < it->idx.size(); ++k) s -= it->val[k] * v[it->idx[k]];
    v[it->pos] = s / it->pivot;
  }
  Eigen::Map<Eigen::VectorXd> rhs(v.data(), m_);
  Eigen::VectorXd sol = lu_.transpose().solve(rhs);
  rhs = sol;
}

void RevisedSimplexSolver::load_column(int j, std::vector<double>& out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (j < n_) {
    for (int k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
      out[lp_.row_index[k]] = lp_.value[k];
    }
  } else {
    out[j - n_] = -1.0;
  }
}

double RevisedSimplexSolver::column_dot(int j, const std::vector<double>& y) const {
  if (j >= n_) return -y[j - n_];
  double s = 0.0;
  for (int k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
    s += lp_.value[k] * y[lp_.row_index[k]];
  }
  return s;
}

void RevisedSimplexSolver::compute_basic_values() {
  std::vector<double> rhs(static_cast<std::size_t>(m_), 0.0);
  for (int j = 0; j < total_; ++j) {
    if (state_[j] == BasisStatus::kBasic) continue;
    x_[j] = detail::nonbasic_value(lp_, j, state_[j]);
    if (x_[j] == 0.0) continue;
    if (j < n_) {
      for (int k = lp_.col_start[j]; k < lp_.col_start[j + 1]; ++k) {
        rhs[lp_.row_index[k]] -= lp_.value[k] * x_[j];
      }
    } else {
      rhs[j - n_] += x_[j];
    }
  }
  ftran(rhs);
  for (int p = 0; p < m_; ++p) x_[head_[p]] = rhs[p];
}

double RevisedSimplexSolver::infeasibility(int j) const {
  const double v = x_[j];
  if (v < lp_.lower[j] - feas_tol(lp_.lower[j])) return lp_.lower[j] - v;
  if (v > lp_.upper[j] + feas_tol(lp_.upper[j])) return v - lp_.upper[j];
  return 0.0;
}

ScaledResult RevisedSimplexSolver::finish(LpStatus status, int iterations,
                                          int infeasible_row) {
  ScaledResult res;
  res.status = status;
  res.iterations = iterations;
  res.infeasible_row = infeasible_row;
  res.x = x_;
  res.state = state_;
  res.y.assign(static_cast<std::size_t>(m_), 0.0);
  res.d.assign(static_cast<std::size_t>(total_), 0.0);
  if (status == LpStatus::kOptimal) {
    for (int p = 0; p < m_; ++p) res.y[p] = lp_.cost[head_[p]];
    btran(res.y);
    for (int j = 0; j < total_; ++j) {
      if (state_[j] != BasisStatus::kBasic) res.d[j] = lp_.cost[j] - column_dot(j, res.y);
    }
  }
  return res;
}

ScaledResult RevisedSimplexSolver::run() {
  x_.assign(static_cast<std::size_t>(total_), 0.0);
  if (m_ == 0) {
    for (int j = 0; j < n_; ++j) {
      const double c = lp_.cost[j];
      if (c > 0.0 || (c == 0.0 && std::isfinite(lp_.lower[j]))) {
        if (!std::isfinite(lp_.lower[j])) return finish(LpStatus::kUnbounded, 0, -1);
        state_[j] = BasisStatus::kAtLower;
      } else if (c < 0.0 || std::isfinite(lp_.upper[j])) {
        if (!std::isfinite(lp_.upper[j])) return finish(LpStatus::kUnbounded, 0, -1);
        state_[j] = BasisStatus::kAtUpper;
      } else {
        state_[j] = BasisStatus::kFree;
      }
      x_[j] = detail::nonbasic_value(lp_, j, state_[j]);
    }
    return finish(LpStatus::kOptimal, 0, -1);
  }

  if (!factorize()) {
    slack_basis();
    if (!factorize()) return finish(LpStatus::kNumericalFailure, 0, -1);
  }
  compute_basic_values();

  const int max_iterations = 50 * (m_ + n_) + 5000;
  std::vector<double> cb(static_cast<std::size_t>(m_));
  std::vector<double> y(static_cast<std::size_t>(m_));
  std::vector<double> alpha(static_cast<std::size_t>(m_));
  int iterations = 0;
  int degenerate_run = 0;
  int verifications = 0;
  bool bland = false;

  while (true) {
    if (iterations >= max_iterations) return finish(LpStatus::kNumericalFailure, iterations, -1);
    if (static_cast<int>(etas_.size()) >= kRefactorEvery) {
      if (!factorize()) {
        slack_basis();
        if (!factorize()) return finish(LpStatus::kNumericalFailure, iterations, -1);
      }
      compute_basic_values();
    }

    bool phase1 = false;
    for (int p = 0; p < m_; ++p) {
      const int j = head_[p];
      const double v = x_[j];
      if (v < lp_.lower[j] - feas_tol(lp_.lower[j])) {
        cb[p] = -1.0;
        phase1 = true;
      } else if (v > lp_.upper[j] + feas_tol(lp_.upper[j])) {
        cb[p] = 1.0;
        phase1 = true;
      } else {
        cb[p] = 0.0;
      }
    }
    if (!phase1) {
      for (int p = 0; p < m_; ++p) cb[p] = lp_.cost[head_[p]];
    }
    y = cb;
    btran(y);

    // Pricing.
    int entering = -1;
    int direction = 0;
    double best = 0.0;
    for (int j = 0; j < total_; ++j) {
      const BasisStatus s = state_[j];
      if (s == BasisStatus::kBasic) continue;
      if (lp_.upper[j] - lp_.lower[j] <= 0.0) continue;
      const double dj = (phase1 ? 0.0 : lp_.cost[j]) - column_dot(j, y);
      double score = 0.0;
      int dir = 0;
      if ((s == BasisStatus::kAtLower || s == BasisStatus::kFree) && dj < -kDualTol) {
        score = -dj;
        dir = 1;
      } else if ((s == BasisStatus::kAtUpper || s == BasisStatus::kFree) && dj > kDualTol) {
        score = dj;
        dir = -1;
      } else {
        continue;
      }
      if (bland) {
        entering = j;
        direction = dir;
        break;
      }
      if (score > best) {
        best = score;
        entering = j;
        direction = dir;
      }
    }

    if (entering < 0) {
      // Confirm on a fresh factorization before declaring a verdict.
      if (!etas_.empty() && verifications < 8) {
        ++verifications;
        if (!factorize()) {
          slack_basis();
          if (!factorize()) return finish(LpStatus::kNumericalFailure, iterations, -1);
        }
        compute_basic_values();
        continue;
      }
      if (phase1) {
        int hint = -1;
        double worst = 0.0;
        for (int p = 0; p < m_; ++p) {
          const int j = head_[p];
          const double inf = infeasibility(j);
          if (inf > worst && j >= n_) {
            worst = inf;
            hint = j - n_;
          }
        }
        return finish(LpStatus::kInfeasible, iterations, hint);
      }
      return finish(LpStatus::kOptimal, iterations, -1);
    }

    load_column(entering, alpha);
    ftran(alpha);

    // Harris ratio test. Basic x_B(theta) = x_B - theta * direction * alpha.
    double flip = lp_.upper[entering] - lp_.lower[entering];
    if (!std::isfinite(flip)) flip = kInf;
    double relaxed = kInf;
    for (int p = 0; p < m_; ++p) {
      if (std::abs(alpha[p]) < kPivotTol) continue;
      const int j = head_[p];
      const double rate = -direction * alpha[p];
      const double v = x_[j];
      double target = 0.0;
      if (rate < 0.0) {
        if (phase1 && v > lp_.upper[j] + feas_tol(lp_.upper[j])) {
          target = lp_.upper[j];
        } else if (phase1 && v < lp_.lower[j] - feas_tol(lp_.lower[j])) {
          continue;
        } else {
          target = lp_.lower[j];
        }
        if (!std::isfinite(target)) continue;
        relaxed = std::min(relaxed, (v - target + feas_tol(target)) / -rate);
      } else {
        if (phase1 && v < lp_.lower[j] - feas_tol(lp_.lower[j])) {
          target = lp_.lower[j];
        } else if (phase1 && v > lp_.upper[j] + feas_tol(lp_.upper[j])) {
          continue;
        } else {
          target = lp_.upper[j];
        }
        if (!std::isfinite(target)) continue;
        relaxed = std::min(relaxed, (target - v + feas_tol(target)) / rate);
      }
    }

    int leave_pos = -1;
    double leave_target = 0.0;
    double theta = kInf;
    double best_pivot = 0.0;
    if (std::isfinite(relaxed)) {
      for (int p = 0; p < m_; ++p) {
        if (std::abs(alpha[p]) < kPivotTol) continue;
        const int j = head_[p];
        const double rate = -direction * alpha[p];
        const double v = x_[j];
        double target = 0.0;
        if (rate < 0.0) {
          if (phase1 && v > lp_.upper[j] + feas_tol(lp_.upper[j])) {
            target = lp_.upper[j];
          } else if (phase1 && v < lp_.lower[j] - feas_tol(lp_.lower[j])) {
            continue;
          } else {
            target = lp_.lower[j];
          }
        } else {
          if (phase1 && v < lp_.lower[j] - feas_tol(lp_.lower[j])) {
            target = lp_.lower[j];
          } else if (phase1 && v > lp_.upper[j] + feas_tol(lp_.upper[j])) {
            continue;
          } else {
            target = lp_.upper[j];
          }
        }
        if (!std::isfinite(target)) continue;
        const double ratio = (target - v) / rate;
        if (ratio > relaxed) continue;
        const double piv = std::abs(alpha[p]);
        const bool better = bland ? (leave_pos < 0 || ratio < theta - 1e-12 ||
                                     (ratio <= theta + 1e-12 && j < head_[leave_pos]))
                                  : piv > best_pivot;
        if (better) {
          best_pivot = piv;
          leave_pos = p;
          leave_target = target;
          theta = ratio;
        }
      }
    }

    if (leave_pos < 0 && !std::isfinite(flip)) {
      if (phase1) return finish(LpStatus::kNumericalFailure, iterations, -1);
      return finish(LpStatus::kUnbounded, iterations, -1);
    }

    const bool do_flip = leave_pos < 0 || flip <= theta;
    if (do_flip) theta = flip;
    theta = std::max(theta, 0.0);

    double max_move = 0.0;
    for (int p = 0; p < m_; ++p) {
      const double delta = theta * direction * alpha[p];
      x_[head_[p]] -= delta;
      max_move = std::max(max_move, std::abs(delta));
    }
    x_[entering] += direction * theta;
    ++iterations;

    if (do_flip) {
      state_[entering] =
          direction > 0 ? BasisStatus::kAtUpper : BasisStatus::kAtLower;
      x_[entering] = direction > 0 ? lp_.upper[entering] : lp_.lower[entering];
    } else {
      const int leaving = head_[leave_pos];
      x_[leaving] = leave_target;
      state_[leaving] =
          leave_target == lp_.lower[leaving] ? BasisStatus::kAtLower : BasisStatus::kAtUpper;
      if (lp_.lower[leaving] == lp_.upper[leaving]) state_[leaving] = BasisStatus::kAtLower;
      state_[entering] = BasisStatus::kBasic;
      head_[leave_pos] = entering;
      Eta eta;
      eta.pos = leave_pos;
      eta.pivot = alpha[leave_pos];
      for (int p = 0; p < m_; ++p) {
        if (p != leave_pos && alpha[p] != 0.0) {
          eta.idx.push_back(p);
          eta.val.push_back(alpha[p]);
        }
      }
      etas_.push_back(std::move(eta));
    }

    if (std::max(theta, max_move) < 1e-12) {
      if (++degenerate_run > kDegenerateSwitch) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
  }
}

class RevisedSimplexBackend final : public LpBackend {
 public:
  [[nodiscard]] std::string_view name() const override { return "simplex"; }
  LpSolution solve(const ConstraintSystem& system, const LpWarmStart* warm_start) override {
    const auto lp = detail::build_scaled_lp(system);
    bool has_basis = false;
    auto state = detail::initial_states(lp, warm_start, &has_basis);
    RevisedSimplexSolver solver(lp, std::move(state));
    return detail::unscale(system, lp, solver.run());
  }
};

}  // namespace

std::unique_ptr<LpBackend> make_revised_simplex() {
  return std::make_unique<RevisedSimplexBackend>();
}

}  // namespace gesha

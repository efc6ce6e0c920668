#include "gesha/constraint_system.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace gesha {

int ConstraintSystem::add_variable(std::string name, double lower, double upper,
                                   double cost, double scale) {
  if (lower > upper) {
    throw std::invalid_argument("variable " + name + " has lower > upper");
  }
  variables_.push_back({std::move(name), lower, upper, cost, scale > 0 ? scale : 1.0});
  return num_variables() - 1;
}

int ConstraintSystem::add_row(std::string name, double lower, double upper,
                              std::vector<Entry> entries) {
  rows_.push_back({std::move(name), lower, upper, std::move(entries)});
  return num_rows() - 1;
}

void ConstraintSystem::add_coefficient(int row, int col, double value) {
  auto& entries = rows_.at(row).entries;
  for (auto& e : entries) {
    if (e.col == col) {
      e.value += value;
      return;
    }
  }
  entries.push_back({col, value});
}

void ConstraintSystem::add_nonlinear(const NonlinearTerm& term) {
  nonlinear_.push_back(term);
}

ConstraintSystem::Offsets ConstraintSystem::append(const ConstraintSystem& other,
                                                   double cost_weight) {
  const Offsets off{num_variables(), num_rows()};
  for (const auto& v : other.variables_) {
    variables_.push_back(v);
    variables_.back().cost *= cost_weight;
  }
  for (const auto& r : other.rows_) {
    Row copy = r;
    for (auto& e : copy.entries) e.col += off.variables;
    rows_.push_back(std::move(copy));
  }
  for (auto term : other.nonlinear_) {
    term.row += off.rows;
    term.first += off.variables;
    term.second += off.variables;
    nonlinear_.push_back(term);
  }
  for (auto link : other.fix_links_) {
    link.row += off.rows;
    if (link.x_col >= 0) link.x_col += off.variables;
    fix_links_.push_back(link);
  }
  objective_constant_ += cost_weight * other.objective_constant_;
  return off;
}

void ConstraintSystem::link_fix_rows(std::span<const FixLink> links,
                                     std::span<const int> x_cols) {
  for (const auto& link : links) {
    const int col = x_cols[static_cast<std::size_t>(link.x_index)];
    add_coefficient(link.row, col, -1.0);
    rows_[link.row].lower = 0.0;
    rows_[link.row].upper = 0.0;
    for (auto& own : fix_links_) {
      if (own.row == link.row) own.x_col = col;
    }
  }
}

double nonlinear_value(const NonlinearTerm& term, std::span<const double> z) {
  const double a = z[static_cast<std::size_t>(term.first)];
  const double b = z[static_cast<std::size_t>(term.second)];
  switch (term.kind) {
    case NonlinearKind::kFriction:
      return term.coef * a * std::sqrt(a * a + term.smoothing) / b;
    case NonlinearKind::kBilinear:
      return term.coef * a * b;
  }
  return 0.0;
}

double ConstraintSystem::objective(std::span<const double> z) const {
  double obj = objective_constant_;
  for (std::size_t j = 0; j < variables_.size(); ++j) obj += variables_[j].cost * z[j];
  return obj;
}

double ConstraintSystem::row_activity(int row, std::span<const double> z) const {
  double act = 0.0;
  for (const auto& e : rows_[row].entries) act += e.value * z[static_cast<std::size_t>(e.col)];
  for (const auto& term : nonlinear_) {
    if (term.row == row) act += nonlinear_value(term, z);
  }
  return act;
}

std::vector<double> ConstraintSystem::row_activities(std::span<const double> z) const {
  std::vector<double> act(rows_.size(), 0.0);
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    for (const auto& e : rows_[r].entries) act[r] += e.value * z[static_cast<std::size_t>(e.col)];
  }
  for (const auto& term : nonlinear_) act[term.row] += nonlinear_value(term, z);
  return act;
}

namespace {
double interval_violation(double v, double lo, double hi) {
  if (v < lo) return lo - v;
  if (v > hi) return v - hi;
  return 0.0;
}
}  // namespace

double ConstraintSystem::max_violation(std::span<const double> z) const {
  double worst = 0.0;
  const auto act = row_activities(z);
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    worst = std::max(worst, interval_violation(act[r], rows_[r].lower, rows_[r].upper));
  }
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    worst = std::max(worst, interval_violation(z[j], variables_[j].lower, variables_[j].upper));
  }
  return worst;
}

double ConstraintSystem::max_nonlinear_residual(std::span<const double> z) const {
  double worst = 0.0;
  for (const auto& term : nonlinear_) {
    const double act = row_activity(term.row, z);
    const auto& row = rows_[term.row];
    worst = std::max(worst, interval_violation(act, row.lower, row.upper) / term.residual_scale);
  }
  return worst;
}

namespace {
void write_term(std::ostream& out, double coef, const std::string& name, bool first) {
  if (coef < 0) {
    out << " - " << -coef << ' ' << name;
  } else {
    out << (first ? " " : " + ") << coef << ' ' << name;
  }
}
}  // namespace

void ConstraintSystem::write_lp(std::ostream& out) const {
  out << "\\ constraint system: " << variables_.size() << " variables, " << rows_.size()
      << " rows, " << nonlinear_.size() << " nonlinear terms\n";
  out << "Minimize\n obj:";
  bool first = true;
  for (const auto& v : variables_) {
    if (v.cost == 0.0) continue;
    write_term(out, v.cost, v.name, first);
    first = false;
  }
  if (objective_constant_ != 0.0) write_term(out, objective_constant_, "", first);
  out << "\nSubject To\n";
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    const auto& row = rows_[r];
    for (const auto& term : nonlinear_) {
      if (static_cast<std::size_t>(term.row) != r) continue;
      out << "\\ nonlinear: " << term.coef
          << (term.kind == NonlinearKind::kFriction ? " * phi(" : " * (")
          << variables_[term.first].name
          << (term.kind == NonlinearKind::kFriction ? ") / " : ") * ")
          << variables_[term.second].name << '\n';
    }
    out << ' ' << row.name << ':';
    bool f = true;
    for (const auto& e : row.entries) {
      write_term(out, e.value, variables_[e.col].name, f);
      f = false;
    }
    if (f) out << " 0 " << variables_.front().name;
    if (row.lower == row.upper) {
      out << " = " << row.lower << '\n';
    } else if (std::isinf(row.lower)) {
      out << " <= " << row.upper << '\n';
    } else if (std::isinf(row.upper)) {
      out << " >= " << row.lower << '\n';
    } else {
      out << " >= " << row.lower << '\n';
      out << ' ' << row.name << "_ub:";
      f = true;
      for (const auto& e : row.entries) {
        write_term(out, e.value, variables_[e.col].name, f);
        f = false;
      }
      out << " <= " << row.upper << '\n';
    }
  }
  out << "Bounds\n";
  for (const auto& v : variables_) {
    if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out << ' ' << v.name << " free\n";
    } else if (v.lower == v.upper) {
      out << ' ' << v.name << " = " << v.lower << '\n';
    } else {
      out << ' ';
      if (std::isinf(v.lower)) {
        out << "-inf";
      } else {
        out << v.lower;
      }
      out << " <= " << v.name << " <= ";
      if (std::isinf(v.upper)) {
        out << "+inf\n";
      } else {
        out << v.upper << '\n';
      }
    }
  }
  out << "End\n";
}

}  // namespace gesha

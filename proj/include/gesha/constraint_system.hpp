#pragma once

// Sparse linear(ized) program container shared by all model builders and
// solvers. Rows are ranged (lower <= a.z + nonlinear terms <= upper); equality
// rows have lower == upper. Nonlinear terms are kept symbolic so the SLP layer
// can linearize them around an iterate.

#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace gesha {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  double cost = 0.0;
  // Characteristic magnitude; used for trust regions and convergence tests.
  double scale = 1.0;
};

struct Entry {
  int col = 0;
  double value = 0.0;
};

struct Row {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<Entry> entries;
};

enum class NonlinearKind {
  // coef * phi(z[first]) / z[second], phi(m) = m * sqrt(m^2 + smoothing)
  kFriction,
  // coef * z[first] * z[second]
  kBilinear,
};

struct NonlinearTerm {
  int row = 0;
  NonlinearKind kind = NonlinearKind::kBilinear;
  int first = 0;
  int second = 0;
  double coef = 1.0;
  double smoothing = 0.0;
  // Magnitude used to normalize this row's residual in merit functions.
  double residual_scale = 1.0;
};

// Row p_{g,t} = x_{g,t} coupling a recourse copy to the first-stage decision.
// When the decision is a constant the row bounds carry x; when it is a
// variable of the same system, `x_col` names it and the row bounds are zero.
struct FixLink {
  int row = 0;
  int x_index = 0;
  int x_col = -1;
};

class ConstraintSystem {
 public:
  int add_variable(std::string name, double lower, double upper,
                   double cost = 0.0, double scale = 1.0);
  int add_row(std::string name, double lower, double upper,
              std::vector<Entry> entries = {});
  void add_coefficient(int row, int col, double value);
  void add_nonlinear(const NonlinearTerm& term);

  struct Offsets {
    int variables = 0;
    int rows = 0;
  };
  // Appends `other` with its objective multiplied by `cost_weight`.
  Offsets append(const ConstraintSystem& other, double cost_weight = 1.0);

  // Turns constant fix rows (p = x) into links p - x_col = 0 against first
  // stage columns of this system. `x_cols[i]` is the column of x_i.
  void link_fix_rows(std::span<const FixLink> links, std::span<const int> x_cols);

  [[nodiscard]] int num_variables() const { return static_cast<int>(variables_.size()); }
  [[nodiscard]] int num_rows() const { return static_cast<int>(rows_.size()); }
  [[nodiscard]] bool is_linear() const { return nonlinear_.empty(); }

  [[nodiscard]] const std::vector<Variable>& variables() const { return variables_; }
  [[nodiscard]] std::vector<Variable>& variables() { return variables_; }
  [[nodiscard]] const std::vector<Row>& rows() const { return rows_; }
  [[nodiscard]] std::vector<Row>& rows() { return rows_; }
  [[nodiscard]] const std::vector<NonlinearTerm>& nonlinear() const { return nonlinear_; }
  [[nodiscard]] std::vector<NonlinearTerm>& nonlinear() { return nonlinear_; }
  [[nodiscard]] const std::vector<FixLink>& fix_links() const { return fix_links_; }
  [[nodiscard]] std::vector<FixLink>& fix_links() { return fix_links_; }

  [[nodiscard]] double objective_constant() const { return objective_constant_; }
  void set_objective_constant(double c) { objective_constant_ = c; }

  // Objective c.z + constant.
  [[nodiscard]] double objective(std::span<const double> z) const;
  // a.z plus all nonlinear terms of the row.
  [[nodiscard]] double row_activity(int row, std::span<const double> z) const;
  [[nodiscard]] std::vector<double> row_activities(std::span<const double> z) const;
  // Largest bound violation over rows (nonlinear terms included) and columns.
  [[nodiscard]] double max_violation(std::span<const double> z) const;
  // Largest |residual| / residual_scale over rows carrying nonlinear terms.
  [[nodiscard]] double max_nonlinear_residual(std::span<const double> z) const;

  // Human readable LP-format dump; nonlinear terms are written as comments.
  void write_lp(std::ostream& out) const;

 private:
  std::vector<Variable> variables_;
  std::vector<Row> rows_;
  std::vector<NonlinearTerm> nonlinear_;
  std::vector<FixLink> fix_links_;
  double objective_constant_ = 0.0;
};

// Value of a nonlinear term at z.
[[nodiscard]] double nonlinear_value(const NonlinearTerm& term, std::span<const double> z);

}  // namespace gesha

#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rasddp::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, Equal, GreaterEqual };

struct VarId {
  std::size_t index = 0;
};

struct RowId {
  std::size_t index = 0;
};

struct Term {
  VarId var;
  double coef = 0.0;
};

struct Row {
  std::vector<Term> terms;  // sparse; absent variables have coefficient 0
  Sense sense = Sense::LessEqual;
  double rhs = 0.0;
};

// Minimisation problem  min c'x + offset  s.t.  rows, lower <= x <= upper.
// Variables may be added after rows; a row's missing entries are zero.
class LinearProgram {
 public:
  VarId add_variable(double lower, double upper, double cost, std::string label = {});
  RowId add_row(std::vector<Term> terms, Sense sense, double rhs, std::string label = {});
  // Dense form: `coefficients` must have exactly num_vars() entries.
  RowId add_dense_row(std::span<const double> coefficients, Sense sense, double rhs,
                      std::string label = {});

  void set_cost(VarId v, double cost) { cost_.at(v.index) = cost; }
  void add_objective_offset(double value) { offset_ += value; }

  std::size_t num_vars() const { return cost_.size(); }
  std::size_t num_rows() const { return rows_.size(); }

  double lower(VarId v) const { return lower_[v.index]; }
  double upper(VarId v) const { return upper_[v.index]; }
  double cost(VarId v) const { return cost_[v.index]; }
  double objective_offset() const { return offset_; }
  const Row& row(RowId r) const { return rows_[r.index]; }

  const std::vector<double>& lowers() const { return lower_; }
  const std::vector<double>& uppers() const { return upper_; }
  const std::vector<double>& costs() const { return cost_; }
  const std::vector<Row>& rows() const { return rows_; }
  const std::vector<std::string>& var_labels() const { return var_labels_; }
  const std::vector<std::string>& row_labels() const { return row_labels_; }

  // Throws MalformedProgram on bad indices, non-finite data or lower > upper.
  void validate() const;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<double> cost_;
  std::vector<std::string> var_labels_;
  std::vector<Row> rows_;
  std::vector<std::string> row_labels_;
  double offset_ = 0.0;
};

enum class Status { Optimal, Infeasible, Unbounded };

std::string_view to_string(Status status) noexcept;

struct LabelIndex {
  std::unordered_map<std::string, std::size_t> vars;
  std::unordered_map<std::string, std::size_t> rows;
};

struct LPSolution {
  Status status = Status::Infeasible;
  double objective = 0.0;
  std::vector<double> primal;
  // d(objective)/d(rhs) per row: the Lagrangian is c'x + sum_i dual_i (rhs_i - a_i x).
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  std::size_t iterations = 0;
  std::shared_ptr<const LabelIndex> labels;

  bool optimal() const { return status == Status::Optimal; }
  double value(VarId v) const { return primal[v.index]; }
  double dual(RowId r) const { return duals[r.index]; }
};

struct SolverOptions {
  double tol_feas = 1e-8;
  double tol_opt = 1e-9;
  double tol_pivot = 1e-9;
  // Consecutive degenerate pivots before switching to Bland's rule.
  std::size_t stall_threshold = 50;
  // 0 selects a size-dependent default.
  std::size_t max_iterations = 0;
  std::size_t refactor_interval = 0;
};

// Bounded-variable primal simplex on a dense basis inverse.
// Throws MalformedProgram or NumericalFailure; Infeasible/Unbounded are statuses.
LPSolution solve(const LinearProgram& program, const SolverOptions& options = {});

double value_of(const LPSolution& solution, std::string_view var_label);
double dual_of(const LPSolution& solution, std::string_view row_label);

}  // namespace rasddp::lp

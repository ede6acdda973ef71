#include "rasddp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rasddp/error.hpp"

namespace rasddp::lp {

VarId LinearProgram::add_variable(double lower, double upper, double cost, std::string label) {
  lower_.push_back(lower);
  upper_.push_back(upper);
  cost_.push_back(cost);
  var_labels_.push_back(std::move(label));
  return VarId{cost_.size() - 1};
}

RowId LinearProgram::add_row(std::vector<Term> terms, Sense sense, double rhs, std::string label) {
  rows_.push_back(Row{std::move(terms), sense, rhs});
  row_labels_.push_back(std::move(label));
  return RowId{rows_.size() - 1};
}

RowId LinearProgram::add_dense_row(std::span<const double> coefficients, Sense sense, double rhs,
                                   std::string label) {
  if (coefficients.size() != num_vars()) {
    throw Error(ErrorCode::MalformedProgram,
                "dense row has " + std::to_string(coefficients.size()) + " coefficients, expected " +
                    std::to_string(num_vars()));
  }
  std::vector<Term> terms;
  for (std::size_t j = 0; j < coefficients.size(); ++j) {
    if (coefficients[j] != 0.0) terms.push_back({VarId{j}, coefficients[j]});
  }
  return add_row(std::move(terms), sense, rhs, std::move(label));
}

void LinearProgram::validate() const {
  for (std::size_t j = 0; j < num_vars(); ++j) {
    if (std::isnan(lower_[j]) || std::isnan(upper_[j]) || lower_[j] > upper_[j] ||
        lower_[j] == kInf || upper_[j] == -kInf) {
      throw Error(ErrorCode::MalformedProgram, "invalid bounds on variable " + std::to_string(j));
    }
    if (!std::isfinite(cost_[j])) {
      throw Error(ErrorCode::MalformedProgram, "non-finite cost on variable " + std::to_string(j));
    }
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (!std::isfinite(rows_[i].rhs)) {
      throw Error(ErrorCode::MalformedProgram, "non-finite rhs on row " + std::to_string(i));
    }
    for (const Term& t : rows_[i].terms) {
      if (t.var.index >= num_vars() || !std::isfinite(t.coef)) {
        throw Error(ErrorCode::MalformedProgram, "bad coefficient on row " + std::to_string(i));
      }
    }
  }
  if (!std::isfinite(offset_)) throw Error(ErrorCode::MalformedProgram, "non-finite offset");
}

std::string_view to_string(Status status) noexcept {
  switch (status) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::Unbounded: return "Unbounded";
  }
  return "?";
}

namespace {

enum class VarState : unsigned char { Basic, AtLower, AtUpper, AtZero };

// Columns 0..n-1 are structural, n..n+m-1 are row logicals r_i = a_i x,
// so the constraint system is [A  -I] (x, r) = 0 with bounds on both.
class Simplex {
 public:
  Simplex(const LinearProgram& program, const SolverOptions& options)
      : opt_(options), m_(program.num_rows()), n_(program.num_vars()), total_(m_ + n_) {
    lo_.resize(total_);
    up_.resize(total_);
    cost_.assign(total_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      lo_[j] = program.lowers()[j];
      up_[j] = program.uppers()[j];
      cost_[j] = program.costs()[j];
    }
    for (std::size_t i = 0; i < m_; ++i) {
      const Row& row = program.rows()[i];
      switch (row.sense) {
        case Sense::LessEqual: lo_[n_ + i] = -kInf; up_[n_ + i] = row.rhs; break;
        case Sense::GreaterEqual: lo_[n_ + i] = row.rhs; up_[n_ + i] = kInf; break;
        case Sense::Equal: lo_[n_ + i] = row.rhs; up_[n_ + i] = row.rhs; break;
      }
    }
    // Compressed columns, merging duplicate entries within a row.
    std::vector<std::size_t> counts(n_ + 1, 0);
    for (const Row& row : program.rows()) {
      for (const Term& t : row.terms) ++counts[t.var.index + 1];
    }
    col_start_.assign(n_ + 1, 0);
    for (std::size_t j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + counts[j + 1];
    col_row_.resize(col_start_[n_]);
    col_val_.resize(col_start_[n_]);
    std::vector<std::size_t> fill(col_start_.begin(), col_start_.end() - 1);
    for (std::size_t i = 0; i < m_; ++i) {
      for (const Term& t : program.rows()[i].terms) {
        const std::size_t j = t.var.index;
        std::size_t k = fill[j];
        if (k > col_start_[j] && col_row_[k - 1] == i) {
          col_val_[k - 1] += t.coef;
        } else {
          col_row_[k] = i;
          col_val_[k] = t.coef;
          ++fill[j];
        }
      }
    }
    // Compact away the slots freed by merged duplicates.
    std::size_t out = 0;
    for (std::size_t j = 0; j < n_; ++j) {
      const std::size_t begin = col_start_[j];
      col_start_[j] = out;
      for (std::size_t k = begin; k < fill[j]; ++k) {
        col_row_[out] = col_row_[k];
        col_val_[out] = col_val_[k];
        ++out;
      }
    }
    col_start_[n_] = out;
    col_row_.resize(out);
    col_val_.resize(out);

    max_iterations_ = opt_.max_iterations ? opt_.max_iterations : 50 * (m_ + total_) + 1000;
    refactor_interval_ =
        opt_.refactor_interval ? opt_.refactor_interval : std::max<std::size_t>(64, m_ / 2);
  }

  LPSolution run() {
    initialise();
    LPSolution result;
    std::size_t since_refactor = 0;
    std::size_t degenerate_streak = 0;
    std::vector<double> cb(m_), y(m_), alpha(m_), delta(m_);

    for (std::size_t iter = 0;; ++iter) {
      if (iter > max_iterations_) {
        throw Error(ErrorCode::NumericalFailure,
                    "simplex iteration limit exceeded (" + std::to_string(max_iterations_) + ")");
      }
      if (since_refactor >= refactor_interval_) {
        refactor();
        since_refactor = 0;
      }
      const bool phase1 = set_phase_costs(cb);
      compute_duals(cb, y);
      const bool bland = degenerate_streak >= opt_.stall_threshold;

      double d_q = 0.0;
      const std::size_t q = choose_entering(phase1, y, bland, d_q);
      if (q == total_) {
        if (since_refactor > 0) {
          refactor();
          since_refactor = 0;
          continue;
        }
        result.status = phase1 ? Status::Infeasible : Status::Optimal;
        result.iterations = iter;
        if (!phase1) finish(y, result);
        return result;
      }

      const double dir = d_q < 0.0 ? 1.0 : -1.0;
      ftran(q, alpha);
      for (std::size_t i = 0; i < m_; ++i) delta[i] = -dir * alpha[i];

      const Step step = phase1 ? ratio_phase1(q, d_q, delta, bland) : ratio_phase2(q, delta, bland);
      if (step.kind == StepKind::Unbounded) {
        if (phase1) {
          throw Error(ErrorCode::NumericalFailure, "phase-one objective unbounded below");
        }
        if (since_refactor > 0) {
          refactor();
          since_refactor = 0;
          continue;
        }
        result.status = Status::Unbounded;
        result.iterations = iter;
        return result;
      }
      apply(q, dir, step, delta, alpha);
      if (step.kind == StepKind::Pivot) ++since_refactor;
      degenerate_streak = step.theta <= 1e-12 ? degenerate_streak + 1 : 0;
    }
  }

 private:
  enum class StepKind { Pivot, Flip, Unbounded };
  struct Step {
    StepKind kind = StepKind::Unbounded;
    double theta = 0.0;
    std::size_t row = 0;        // basis position leaving
    bool leave_at_upper = false;
  };

  double& binv(std::size_t row, std::size_t col) { return binv_[col * m_ + row]; }

  template <class F>
  void for_column(std::size_t j, F&& f) const {
    if (j < n_) {
      for (std::size_t k = col_start_[j]; k < col_start_[j + 1]; ++k) f(col_row_[k], col_val_[k]);
    } else {
      f(j - n_, -1.0);
    }
  }

  void initialise() {
    state_.assign(total_, VarState::Basic);
    x_.assign(total_, 0.0);
    head_.resize(m_);
    for (std::size_t j = 0; j < n_; ++j) {
      if (std::isfinite(lo_[j])) {
        state_[j] = VarState::AtLower;
        x_[j] = lo_[j];
      } else if (std::isfinite(up_[j])) {
        state_[j] = VarState::AtUpper;
        x_[j] = up_[j];
      } else {
        state_[j] = VarState::AtZero;
        x_[j] = 0.0;
      }
    }
    for (std::size_t i = 0; i < m_; ++i) head_[i] = n_ + i;
    refactor();
  }

  // Rebuilds the basis inverse from scratch, exploiting that logical columns
  // are signed unit vectors: with rows split into those covered by a basic
  // logical (RL) and the rest (RS), B = [-I C; 0 D] and B^-1 = [-I C D^-1; 0 D^-1].
  void refactor() {
    std::vector<long> logical_pos(m_, -1);
    std::vector<std::size_t> struct_pos;
    for (std::size_t p = 0; p < m_; ++p) {
      if (head_[p] >= n_) {
        logical_pos[head_[p] - n_] = static_cast<long>(p);
      } else {
        struct_pos.push_back(p);
      }
    }
    std::vector<std::size_t> rs_rows;
    std::vector<long> rs_index(m_, -1);
    for (std::size_t i = 0; i < m_; ++i) {
      if (logical_pos[i] < 0) {
        rs_index[i] = static_cast<long>(rs_rows.size());
        rs_rows.push_back(i);
      }
    }
    const std::size_t k = struct_pos.size();
    if (rs_rows.size() != k) throw Error(ErrorCode::NumericalFailure, "basis size mismatch");

    // D is k x k (row-major), inverted in place by Gauss-Jordan with partial pivoting.
    std::vector<double> d(k * k, 0.0), dinv(k * k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
      for_column(head_[struct_pos[c]], [&](std::size_t row, double v) {
        if (rs_index[row] >= 0) d[static_cast<std::size_t>(rs_index[row]) * k + c] += v;
      });
    }
    for (std::size_t i = 0; i < k; ++i) dinv[i * k + i] = 1.0;
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t piv = c;
      double best = std::abs(d[c * k + c]);
      for (std::size_t r = c + 1; r < k; ++r) {
        if (std::abs(d[r * k + c]) > best) {
          best = std::abs(d[r * k + c]);
          piv = r;
        }
      }
      if (best < 1e-13) throw Error(ErrorCode::NumericalFailure, "singular basis");
      if (piv != c) {
        for (std::size_t j = 0; j < k; ++j) {
          std::swap(d[c * k + j], d[piv * k + j]);
          std::swap(dinv[c * k + j], dinv[piv * k + j]);
        }
      }
      const double inv = 1.0 / d[c * k + c];
      for (std::size_t j = 0; j < k; ++j) {
        d[c * k + j] *= inv;
        dinv[c * k + j] *= inv;
      }
      for (std::size_t r = 0; r < k; ++r) {
        const double f = d[r * k + c];
        if (r == c || f == 0.0) continue;
        for (std::size_t j = 0; j < k; ++j) {
          d[r * k + j] -= f * d[c * k + j];
          dinv[r * k + j] -= f * dinv[c * k + j];
        }
      }
    }

    binv_.assign(m_ * m_, 0.0);
    // Structural positions: row c of D^-1 placed on RS columns.
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t s = 0; s < k; ++s) binv(struct_pos[c], rs_rows[s]) = dinv[c * k + s];
    }
    // Logical positions: -e_i on RL plus (C D^-1) on RS columns.
    for (std::size_t i = 0; i < m_; ++i) {
      if (logical_pos[i] >= 0) binv(static_cast<std::size_t>(logical_pos[i]), i) = -1.0;
    }
    for (std::size_t c = 0; c < k; ++c) {
      for_column(head_[struct_pos[c]], [&](std::size_t row, double v) {
        if (logical_pos[row] < 0) return;
        const std::size_t p = static_cast<std::size_t>(logical_pos[row]);
        for (std::size_t s = 0; s < k; ++s) binv(p, rs_rows[s]) += v * dinv[c * k + s];
      });
    }
    recompute_basic_values();
  }

  void recompute_basic_values() {
    std::vector<double> rhs(m_, 0.0);
    for (std::size_t j = 0; j < total_; ++j) {
      if (state_[j] == VarState::Basic || x_[j] == 0.0) continue;
      const double xj = x_[j];
      for_column(j, [&](std::size_t row, double v) { rhs[row] -= v * xj; });
    }
    for (std::size_t p = 0; p < m_; ++p) x_[head_[p]] = 0.0;
    for (std::size_t c = 0; c < m_; ++c) {
      if (rhs[c] == 0.0) continue;
      const double* col = &binv_[c * m_];
      for (std::size_t p = 0; p < m_; ++p) x_[head_[p]] += col[p] * rhs[c];
    }
  }

  // Returns true when some basic variable is infeasible (phase one).
  bool set_phase_costs(std::vector<double>& cb) const {
    bool infeasible = false;
    for (std::size_t p = 0; p < m_; ++p) {
      const std::size_t j = head_[p];
      if (x_[j] < lo_[j] - opt_.tol_feas) {
        cb[p] = -1.0;
        infeasible = true;
      } else if (x_[j] > up_[j] + opt_.tol_feas) {
        cb[p] = 1.0;
        infeasible = true;
      } else {
        cb[p] = 0.0;
      }
    }
    if (!infeasible) {
      for (std::size_t p = 0; p < m_; ++p) cb[p] = cost_[head_[p]];
    }
    return infeasible;
  }

  void compute_duals(const std::vector<double>& cb, std::vector<double>& y) const {
    for (std::size_t c = 0; c < m_; ++c) {
      const double* col = &binv_[c * m_];
      double s = 0.0;
      for (std::size_t p = 0; p < m_; ++p) s += cb[p] * col[p];
      y[c] = s;
    }
  }

  double reduced_cost(std::size_t j, bool phase1, const std::vector<double>& y) const {
    double d = phase1 ? 0.0 : cost_[j];
    for_column(j, [&](std::size_t row, double v) { d -= y[row] * v; });
    return d;
  }

  std::size_t choose_entering(bool phase1, const std::vector<double>& y, bool bland,
                              double& d_q) const {
    std::size_t best = total_;
    double best_score = 0.0;
    for (std::size_t j = 0; j < total_; ++j) {
      const VarState s = state_[j];
      if (s == VarState::Basic || lo_[j] == up_[j]) continue;
      const double d = reduced_cost(j, phase1, y);
      bool eligible = false;
      switch (s) {
        case VarState::AtLower: eligible = d < -opt_.tol_opt; break;
        case VarState::AtUpper: eligible = d > opt_.tol_opt; break;
        case VarState::AtZero: eligible = std::abs(d) > opt_.tol_opt; break;
        case VarState::Basic: break;
      }
      if (!eligible) continue;
      if (bland) {
        d_q = d;
        return j;
      }
      if (std::abs(d) > best_score) {
        best_score = std::abs(d);
        best = j;
        d_q = d;
      }
    }
    return best;
  }

  void ftran(std::size_t j, std::vector<double>& alpha) const {
    std::fill(alpha.begin(), alpha.end(), 0.0);
    for_column(j, [&](std::size_t row, double v) {
      const double* col = &binv_[row * m_];
      for (std::size_t p = 0; p < m_; ++p) alpha[p] += v * col[p];
    });
  }

  // Two-pass (Harris) ratio test; Bland mode uses exact ratios, smallest index on ties.
  Step ratio_phase2(std::size_t q, const std::vector<double>& delta, bool bland) const {
    const double tol = bland ? 0.0 : opt_.tol_feas;
    double bound = kInf;
    for (std::size_t p = 0; p < m_; ++p) {
      const std::size_t j = head_[p];
      if (delta[p] < -opt_.tol_pivot && std::isfinite(lo_[j])) {
        bound = std::min(bound, (x_[j] - lo_[j] + tol) / -delta[p]);
      } else if (delta[p] > opt_.tol_pivot && std::isfinite(up_[j])) {
        bound = std::min(bound, (up_[j] - x_[j] + tol) / delta[p]);
      }
    }
    const double flip = up_[q] - lo_[q];
    if (std::isfinite(flip) && flip <= bound) {
      return Step{StepKind::Flip, flip, 0, false};
    }
    if (!std::isfinite(bound)) return Step{};

    Step step;
    double best_mag = -1.0;
    std::size_t best_index = total_;
    for (std::size_t p = 0; p < m_; ++p) {
      const std::size_t j = head_[p];
      double ratio = kInf;
      bool at_upper = false;
      if (delta[p] < -opt_.tol_pivot && std::isfinite(lo_[j])) {
        ratio = (x_[j] - lo_[j]) / -delta[p];
      } else if (delta[p] > opt_.tol_pivot && std::isfinite(up_[j])) {
        ratio = (up_[j] - x_[j]) / delta[p];
        at_upper = true;
      } else {
        continue;
      }
      if (ratio > bound) continue;
      const bool better = bland ? j < best_index : std::abs(delta[p]) > best_mag;
      if (better) {
        best_mag = std::abs(delta[p]);
        best_index = j;
        step = Step{StepKind::Pivot, std::max(ratio, 0.0), p, at_upper};
      }
    }
    return step;
  }

  // Phase one minimises the sum of infeasibilities. Breakpoints where an
  // infeasible basic variable becomes feasible are passed while the slope of
  // the piecewise-linear objective stays negative.
  Step ratio_phase1(std::size_t q, double d_q, const std::vector<double>& delta, bool bland) const {
    struct Breakpoint {
      double theta;
      std::size_t pos;
      bool at_upper;
      double gain;
    };
    std::vector<Breakpoint> soft;
    Step hard;
    hard.theta = kInf;
    double hard_mag = -1.0;
    auto offer_hard = [&](double theta, std::size_t p, bool at_upper) {
      theta = std::max(theta, 0.0);
      const double mag = std::abs(delta[p]);
      const bool take = theta < hard.theta - 1e-12 ||
                        (theta <= hard.theta + 1e-12 &&
                         (bland ? head_[p] < head_[hard.row] : mag > hard_mag));
      if (take) {
        hard = Step{StepKind::Pivot, theta, p, at_upper};
        hard_mag = mag;
      }
    };
    for (std::size_t p = 0; p < m_; ++p) {
      const std::size_t j = head_[p];
      const double dp = delta[p];
      if (std::abs(dp) <= opt_.tol_pivot) continue;
      const double x = x_[j];
      if (x < lo_[j] - opt_.tol_feas) {
        if (dp > 0.0) {
          soft.push_back({(lo_[j] - x) / dp, p, false, dp});
          if (std::isfinite(up_[j])) offer_hard((up_[j] - x) / dp, p, true);
        }
      } else if (x > up_[j] + opt_.tol_feas) {
        if (dp < 0.0) {
          soft.push_back({(x - up_[j]) / -dp, p, true, -dp});
          if (std::isfinite(lo_[j])) offer_hard((x - lo_[j]) / -dp, p, false);
        }
      } else if (dp < 0.0 && std::isfinite(lo_[j])) {
        offer_hard((x - lo_[j]) / -dp, p, false);
      } else if (dp > 0.0 && std::isfinite(up_[j])) {
        offer_hard((up_[j] - x) / dp, p, true);
      }
    }
    const double flip = up_[q] - lo_[q];
    if (std::isfinite(flip) && flip < hard.theta) {
      hard = Step{StepKind::Flip, flip, 0, false};
    }

    std::sort(soft.begin(), soft.end(), [&](const Breakpoint& a, const Breakpoint& b) {
      if (a.theta != b.theta) return a.theta < b.theta;
      return head_[a.pos] < head_[b.pos];
    });
    double slope = -std::abs(d_q);
    for (const Breakpoint& b : soft) {
      if (b.theta > hard.theta) break;
      slope += b.gain;
      if (bland || slope >= -opt_.tol_opt) {
        return Step{StepKind::Pivot, std::max(b.theta, 0.0), b.pos, b.at_upper};
      }
    }
    if (!std::isfinite(hard.theta)) return Step{};
    return hard;
  }

  void apply(std::size_t q, double dir, const Step& step, const std::vector<double>& delta,
             const std::vector<double>& alpha) {
    const double theta = step.theta;
    if (theta != 0.0) {
      for (std::size_t p = 0; p < m_; ++p) x_[head_[p]] += theta * delta[p];
    }
    if (step.kind == StepKind::Flip) {
      if (state_[q] == VarState::AtLower) {
        state_[q] = VarState::AtUpper;
        x_[q] = up_[q];
      } else {
        state_[q] = VarState::AtLower;
        x_[q] = lo_[q];
      }
      return;
    }
    const std::size_t r = step.row;
    const std::size_t leaving = head_[r];
    const double entering_value = x_[q] + dir * theta;
    state_[leaving] = step.leave_at_upper ? VarState::AtUpper : VarState::AtLower;
    x_[leaving] = step.leave_at_upper ? up_[leaving] : lo_[leaving];
    head_[r] = q;
    state_[q] = VarState::Basic;
    x_[q] = entering_value;

    const double pivot = alpha[r];
    for (std::size_t c = 0; c < m_; ++c) {
      double* col = &binv_[c * m_];
      const double t = col[r] / pivot;
      if (t == 0.0) continue;
      for (std::size_t p = 0; p < m_; ++p) col[p] -= alpha[p] * t;
      col[r] = t;
    }
  }

  void finish(const std::vector<double>& y, LPSolution& result) const {
    result.primal.assign(x_.begin(), x_.begin() + static_cast<long>(n_));
    result.duals = y;
    result.reduced_costs.resize(n_);
    double obj = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      result.reduced_costs[j] = state_[j] == VarState::Basic ? 0.0 : reduced_cost(j, false, y);
      obj += cost_[j] * x_[j];
    }
    result.objective = obj;
  }

  const SolverOptions& opt_;
  std::size_t m_, n_, total_;
  std::vector<double> lo_, up_, cost_;
  std::vector<std::size_t> col_start_, col_row_;
  std::vector<double> col_val_;
  std::vector<std::size_t> head_;
  std::vector<VarState> state_;
  std::vector<double> x_;
  std::vector<double> binv_;
  std::size_t max_iterations_ = 0;
  std::size_t refactor_interval_ = 0;
};

std::shared_ptr<const LabelIndex> build_labels(const LinearProgram& program) {
  auto index = std::make_shared<LabelIndex>();
  for (std::size_t j = 0; j < program.num_vars(); ++j) {
    if (!program.var_labels()[j].empty()) index->vars.emplace(program.var_labels()[j], j);
  }
  for (std::size_t i = 0; i < program.num_rows(); ++i) {
    if (!program.row_labels()[i].empty()) index->rows.emplace(program.row_labels()[i], i);
  }
  return index;
}

}  // namespace

LPSolution solve(const LinearProgram& program, const SolverOptions& options) {
  program.validate();
  Simplex simplex(program, options);
  LPSolution solution = simplex.run();
  if (solution.optimal()) solution.objective += program.objective_offset();
  solution.labels = build_labels(program);
  return solution;
}

double value_of(const LPSolution& solution, std::string_view var_label) {
  if (!solution.optimal()) throw Error(ErrorCode::NotOptimal, "solution is not optimal");
  if (solution.labels) {
    auto it = solution.labels->vars.find(std::string(var_label));
    if (it != solution.labels->vars.end()) return solution.primal[it->second];
  }
  throw Error(ErrorCode::UnknownTag, "no variable labelled '" + std::string(var_label) + "'");
}

double dual_of(const LPSolution& solution, std::string_view row_label) {
  if (!solution.optimal()) throw Error(ErrorCode::NotOptimal, "solution is not optimal");
  if (solution.labels) {
    auto it = solution.labels->rows.find(std::string(row_label));
    if (it != solution.labels->rows.end()) return solution.duals[it->second];
  }
  throw Error(ErrorCode::UnknownTag, "no row labelled '" + std::string(row_label) + "'");
}

}  // namespace rasddp::lp

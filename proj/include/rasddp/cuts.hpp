#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rasddp {

/// Affine minorant  gradient'(x - anchor) + intercept  of one opening's cost-to-go.
struct Cut {
  std::vector<double> gradient;
  std::vector<double> anchor;
  double intercept = 0.0;

  double value_at(std::span<const double> state) const;
  // gradient'x + constant(); the constant is what a cut row's rhs needs.
  double constant() const;

  friend bool operator==(const Cut&, const Cut&) = default;
};

/// Multicut pool: cuts at (t, l) bound the cost-to-go of stage t + 1 under
/// opening l, for t in [0, stages - 1). Append-only.
class CutPool {
 public:
  CutPool() = default;
  CutPool(std::size_t stages, std::size_t openings, std::size_t dimension);

  std::size_t stages() const { return stages_; }
  std::size_t openings() const { return openings_; }
  std::size_t dimension() const { return dimension_; }
  bool has_future(std::size_t stage) const { return stage + 1 < stages_; }

  std::span<const Cut> cuts(std::size_t stage, std::size_t opening) const;
  void add(std::size_t stage, std::size_t opening, Cut cut);
  std::size_t size() const;

  friend bool operator==(const CutPool&, const CutPool&) = default;

 private:
  std::size_t stages_ = 0;
  std::size_t openings_ = 0;
  std::size_t dimension_ = 0;
  std::vector<std::vector<Cut>> cuts_;  // index stage * openings + opening
};

}  // namespace rasddp

#include "rasddp/cuts.hpp"

#include <cmath>
#include <string>

#include "rasddp/error.hpp"

namespace rasddp {

double Cut::value_at(std::span<const double> state) const {
  if (state.size() != gradient.size()) {
    throw Error(ErrorCode::DimensionMismatch, "cut evaluated at a state of wrong dimension");
  }
  double v = intercept;
  for (std::size_t k = 0; k < state.size(); ++k) v += gradient[k] * (state[k] - anchor[k]);
  return v;
}

double Cut::constant() const {
  double c = intercept;
  for (std::size_t k = 0; k < gradient.size(); ++k) c -= gradient[k] * anchor[k];
  return c;
}

CutPool::CutPool(std::size_t stages, std::size_t openings, std::size_t dimension)
    : stages_(stages),
      openings_(openings),
      dimension_(dimension),
      cuts_(stages > 1 ? (stages - 1) * openings : 0) {}

std::span<const Cut> CutPool::cuts(std::size_t stage, std::size_t opening) const {
  if (!has_future(stage) || opening >= openings_) {
    throw Error(ErrorCode::InvalidArgument, "cut pool index out of range");
  }
  return cuts_[stage * openings_ + opening];
}

void CutPool::add(std::size_t stage, std::size_t opening, Cut cut) {
  if (!has_future(stage) || opening >= openings_) {
    throw Error(ErrorCode::InvalidArgument, "cut pool index out of range");
  }
  if (cut.gradient.size() != dimension_ || cut.anchor.size() != dimension_) {
    throw Error(ErrorCode::DimensionMismatch, "cut dimension " + std::to_string(cut.gradient.size()) +
                                                  " does not match pool dimension " +
                                                  std::to_string(dimension_));
  }
  bool finite = std::isfinite(cut.intercept);
  for (std::size_t k = 0; k < dimension_; ++k) {
    finite = finite && std::isfinite(cut.gradient[k]) && std::isfinite(cut.anchor[k]);
  }
  if (!finite) throw Error(ErrorCode::InvalidArgument, "cut has non-finite coefficients");
  cuts_[stage * openings_ + opening].push_back(std::move(cut));
}

std::size_t CutPool::size() const {
  std::size_t n = 0;
  for (const auto& list : cuts_) n += list.size();
  return n;
}

}  // namespace rasddp

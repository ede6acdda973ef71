#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rasddp {

/// Reservoir storages plus, per hydro, its most recent inflows (newest first).
/// The flat layout used by cuts is all storages followed by each hydro's lags.
struct StateVector {
  std::vector<double> storages;
  std::vector<std::vector<double>> inflow_lags;

  std::size_t dimension() const;
  std::vector<double> flat() const;
  // Rebuilds a state with the same shape as `shape` from flat values.
  static StateVector from_flat(std::span<const double> values, const StateVector& shape);

  friend bool operator==(const StateVector&, const StateVector&) = default;
};

}  // namespace rasddp

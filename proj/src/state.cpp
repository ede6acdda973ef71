#include "rasddp/state.hpp"

#include "rasddp/error.hpp"

namespace rasddp {

std::size_t StateVector::dimension() const {
  std::size_t d = storages.size();
  for (const auto& lags : inflow_lags) d += lags.size();
  return d;
}

std::vector<double> StateVector::flat() const {
  std::vector<double> out(storages);
  for (const auto& lags : inflow_lags) out.insert(out.end(), lags.begin(), lags.end());
  return out;
}

StateVector StateVector::from_flat(std::span<const double> values, const StateVector& shape) {
  if (values.size() != shape.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "flat state has wrong dimension");
  }
  StateVector out;
  std::size_t k = 0;
  out.storages.assign(values.begin(), values.begin() + static_cast<long>(shape.storages.size()));
  k = shape.storages.size();
  for (const auto& lags : shape.inflow_lags) {
    out.inflow_lags.emplace_back(values.begin() + static_cast<long>(k),
                                 values.begin() + static_cast<long>(k + lags.size()));
    k += lags.size();
  }
  return out;
}

}  // namespace rasddp

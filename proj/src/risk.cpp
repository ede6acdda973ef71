#include "rasddp/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rasddp/error.hpp"
#include "rasddp/lp.hpp"

namespace rasddp::risk {

namespace {

void require_values(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "empty value list");
}

std::vector<double> sorted_copy(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted;
}

// Weights by sorted position (1-based); the quantile entry may be negative.
struct PositionWeights {
  double below;
  double at_quantile;
  double above;
  std::size_t nu;
};

PositionWeights position_weights(std::size_t count, const RiskMeasure& m) {
  const double L = static_cast<double>(count);
  const double lambda = m.lambda();
  const std::size_t nu = quantile_position(count, m.alpha());
  const double base = (1.0 - lambda) / L;
  const double tail = lambda / ((1.0 - m.alpha()) * L);
  return {base, base + lambda - tail * static_cast<double>(count - nu), base + tail, nu};
}

WeightVector weights_impl(std::span<const double> betas, const RiskMeasure& measure,
                          bool allow_clamp, bool* clamped) {
  require_values(betas);
  for (double b : betas) {
    if (!std::isfinite(b)) throw Error(ErrorCode::InvalidArgument, "non-finite cost-to-go value");
  }
  const std::size_t count = betas.size();
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return betas[a] < betas[b]; });

  PositionWeights pw = position_weights(count, measure);
  bool did_clamp = false;
  if (pw.at_quantile < 0.0) {
    // Rounding in the quantile snap can leave a harmless -1e-17.
    if (pw.at_quantile < -1e-12 && !allow_clamp) {
      throw Error(ErrorCode::NegativeWeight,
                  "quantile weight " + std::to_string(pw.at_quantile) + " is negative");
    }
    did_clamp = pw.at_quantile < -1e-12;
    pw.at_quantile = 0.0;
  }
  std::vector<double> weights(count);
  for (std::size_t pos = 1; pos <= count; ++pos) {
    const double w = pos < pw.nu ? pw.below : (pos == pw.nu ? pw.at_quantile : pw.above);
    weights[order[pos - 1]] = w;
  }
  if (did_clamp) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    for (double& w : weights) w /= total;
  }
  if (clamped) *clamped = did_clamp;
  return WeightVector(std::move(weights));
}

}  // namespace

RiskMeasure::RiskMeasure(double lambda, double alpha) : lambda_(lambda), alpha_(alpha) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "lambda must lie in [0, 1]");
  }
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1)");
  }
}

WeightVector::WeightVector(std::vector<double> weights) : weights_(std::move(weights)) {
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw Error(ErrorCode::NegativeWeight, "weights must be nonnegative");
    total += w;
  }
  if (weights_.empty() || std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "weights must sum to one");
  }
}

WeightVector WeightVector::uniform(std::size_t size) {
  if (size == 0) throw Error(ErrorCode::EmptyInput, "uniform weights over zero openings");
  return WeightVector(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

double WeightVector::dot(std::span<const double> values) const {
  if (values.size() != weights_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "weight/value length mismatch");
  }
  double s = 0.0;
  for (std::size_t l = 0; l < values.size(); ++l) s += weights_[l] * values[l];
  return s;
}

double mean(std::span<const double> values) {
  require_values(values);
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::size_t quantile_position(std::size_t atoms, double alpha) {
  const double scaled = alpha * static_cast<double>(atoms);
  const double nearest = std::round(scaled);
  const double snapped = std::abs(scaled - nearest) <= 1e-9 ? nearest : std::ceil(scaled);
  return std::max<std::size_t>(1, static_cast<std::size_t>(snapped));
}

double var_oracle(std::span<const double> values, double alpha) {
  require_values(values);
  const std::vector<double> sorted = sorted_copy(values);
  return sorted[quantile_position(sorted.size(), alpha) - 1];
}

double cvar_oracle(std::span<const double> values, double alpha) {
  require_values(values);
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1)");
  }
  const double L = static_cast<double>(values.size());
  double best = std::numeric_limits<double>::infinity();
  for (double b : values) {
    double excess = 0.0;
    for (double y : values) excess += std::max(0.0, y - b);
    best = std::min(best, b + excess / ((1.0 - alpha) * L));
  }
  return best;
}

double rho(std::span<const double> values, const RiskMeasure& measure) {
  const double expectation = mean(values);
  if (measure.lambda() == 0.0) return expectation;
  return (1.0 - measure.lambda()) * expectation +
         measure.lambda() * cvar_oracle(values, measure.alpha());
}

RhoLp rho_lp(std::span<const double> values, const RiskMeasure& measure) {
  require_values(values);
  const double L = static_cast<double>(values.size());
  const double lambda = measure.lambda();
  lp::LinearProgram program;
  const lp::VarId z = program.add_variable(-lp::kInf, lp::kInf, lambda, "z");
  std::vector<lp::VarId> deltas;
  for (std::size_t l = 0; l < values.size(); ++l) {
    deltas.push_back(program.add_variable(0.0, lp::kInf, lambda / ((1.0 - measure.alpha()) * L),
                                          "delta" + std::to_string(l)));
    program.add_row({{deltas.back(), 1.0}, {z, 1.0}}, lp::Sense::GreaterEqual, values[l]);
  }
  program.add_objective_offset((1.0 - lambda) * mean(values));
  const lp::LPSolution solution = lp::solve(program);
  if (!solution.optimal()) {
    throw Error(ErrorCode::NumericalFailure,
                "risk LP returned " + std::string(lp::to_string(solution.status)));
  }
  RhoLp out;
  out.value = solution.objective;
  out.z = solution.value(z);
  for (lp::VarId d : deltas) out.deltas.push_back(solution.value(d));
  return out;
}

WeightVector sampling_weights(std::span<const double> betas, const RiskMeasure& measure) {
  return weights_impl(betas, measure, false, nullptr);
}

WeightVector sampling_weights_clamped(std::span<const double> betas, const RiskMeasure& measure,
                                      bool* clamped) {
  return weights_impl(betas, measure, true, clamped);
}

}  // namespace rasddp::risk

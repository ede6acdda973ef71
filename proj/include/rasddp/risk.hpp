#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rasddp::risk {

/// Composite measure rho[Y] = (1 - lambda) E[Y] + lambda CVaR_alpha[Y] over
/// equiprobable atoms. lambda in [0, 1], alpha in [0, 1).
class RiskMeasure {
 public:
  RiskMeasure() = default;
  RiskMeasure(double lambda, double alpha);

  static RiskMeasure neutral() { return {}; }

  double lambda() const { return lambda_; }
  double alpha() const { return alpha_; }
  bool is_neutral() const { return lambda_ == 0.0; }

  friend bool operator==(const RiskMeasure&, const RiskMeasure&) = default;

 private:
  double lambda_ = 0.0;
  double alpha_ = 0.0;
};

/// Probability distribution over openings.
class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::vector<double> weights);

  static WeightVector uniform(std::size_t size);

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t l) const { return weights_[l]; }
  const std::vector<double>& values() const { return weights_; }
  double dot(std::span<const double> values) const;

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  std::vector<double> weights_;
};

double mean(std::span<const double> values);

/// 1-based sorted position of the alpha-quantile among `atoms` equiprobable atoms:
/// ceil(alpha * atoms), at least 1. Products within 1e-9 of an integer snap to it.
std::size_t quantile_position(std::size_t atoms, double alpha);

double var_oracle(std::span<const double> values, double alpha);

/// min_b { b + E[(Y - b)^+] / (1 - alpha) }, scanning b over the atoms.
double cvar_oracle(std::span<const double> values, double alpha);

double rho(std::span<const double> values, const RiskMeasure& measure);

struct RhoLp {
  double value = 0.0;
  double z = 0.0;
  std::vector<double> deltas;
};

/// Same quantity through its linear-programming form, solved by lp::solve.
RhoLp rho_lp(std::span<const double> values, const RiskMeasure& measure);

/// Closed-form weights w with sum_l w_l betas_l = rho(betas). Ties are broken by
/// original index. Throws NegativeWeight if the quantile atom's weight is negative.
WeightVector sampling_weights(std::span<const double> betas, const RiskMeasure& measure);

/// As sampling_weights, but a negative quantile weight is clamped to zero and the
/// vector renormalised; `clamped` reports whether that happened.
WeightVector sampling_weights_clamped(std::span<const double> betas, const RiskMeasure& measure,
                                      bool* clamped = nullptr);

}  // namespace rasddp::risk

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rasddp/cuts.hpp"
#include "rasddp/hydrothermal.hpp"
#include "rasddp/risk.hpp"
#include "rasddp/scenario.hpp"

namespace rasddp::sddp {

struct EngineConfig {
  std::size_t max_iterations = 100;
  std::size_t min_iterations = 10;
  std::size_t batch_size = 10;
  std::uint64_t seed = 0;
  scenario::SamplerMode sampler = scenario::SamplerMode::RiskAdjusted;
  risk::RiskMeasure measure;
  double stop_gap_tol = 1e-6;  // relative slack added to the one-sided test
  double ub_confidence = 1.96;
  std::size_t threads = 1;     // worker count; results do not depend on it

  /// Throws InvalidArgument unless 1 <= min_iterations <= max_iterations, batch_size >= 1,
  /// threads >= 1 and the tolerances are finite and nonnegative.
  void validate() const;

  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

struct UpperBound {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;

  friend bool operator==(const UpperBound&, const UpperBound&) = default;
};

struct BoundsEntry {
  std::size_t iteration = 0;  // 1-based
  double lower_bound = 0.0;
  std::optional<UpperBound> upper;  // absent on uniform iterations in alternating mode
  scenario::SamplerMode sampler = scenario::SamplerMode::Uniform;  // Uniform or RiskAdjusted
  double wall_ms = 0.0;         // elapsed since training started

  friend bool operator==(const BoundsEntry&, const BoundsEntry&) = default;
};

using BoundsLog = std::vector<BoundsEntry>;

struct TrainedPolicy {
  CutPool cuts;
  EngineConfig config;
  BoundsLog bounds;
  std::string fingerprint;

  friend bool operator==(const TrainedPolicy&, const TrainedPolicy&) = default;
};

/// S sampled paths. Stage 0 is solved at the initial state; the opening of
/// stage t + 1 is drawn from weights derived from the stage-t betas when
/// `risk_adjusted`, uniformly otherwise. Path s draws from Rng::for_path(seed, iteration, s).
std::vector<scenario::PathRecord> forward_pass(const hydro::SystemCase& system,
                                               const scenario::Lattice& lattice, const CutPool& cuts,
                                               const risk::RiskMeasure& measure, bool risk_adjusted,
                                               std::size_t iteration, std::size_t paths,
                                               std::uint64_t seed, std::size_t threads = 1);

/// Adds S * (T - 1) * L cuts, walking stages from last to second. Cuts are
/// appended in (path, opening) order regardless of `threads`.
std::size_t backward_pass(const hydro::SystemCase& system, const scenario::Lattice& lattice,
                          CutPool& cuts, const std::vector<scenario::PathRecord>& paths,
                          const risk::RiskMeasure& measure, std::size_t threads = 1);

double lower_bound(const hydro::SystemCase& system, const scenario::Lattice& lattice,
                   const CutPool& cuts, const risk::RiskMeasure& measure);

/// Mean and standard error of per-path total costs; EmptyBatch when empty.
UpperBound upper_bound_estimate(const std::vector<scenario::PathRecord>& paths);

/// Empty pool sized for the system and lattice.
CutPool empty_pool(const hydro::SystemCase& system, const scenario::Lattice& lattice);

TrainedPolicy train(const hydro::SystemCase& system, const scenario::Lattice& lattice,
                    const EngineConfig& config);

/// Value of the policy on the full tree, with child values aggregated by the
/// weights implied by each node's betas. TreeTooLarge beyond `cap` leaves.
double evaluate_policy_exact(const hydro::SystemCase& system, const scenario::Lattice& lattice,
                             const CutPool& cuts, const risk::RiskMeasure& measure,
                             std::size_t cap = scenario::kDefaultPathCap);

}  // namespace rasddp::sddp

#include "rasddp/sddp.hpp"

#include <chrono>
#include <cmath>

#include "parallel.hpp"
#include "rasddp/case_io.hpp"
#include "rasddp/error.hpp"

namespace rasddp::sddp {

using scenario::Lattice;
using scenario::PathRecord;
using scenario::StageRecord;

void EngineConfig::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (max_iterations < 1) fail("max_iterations must be at least 1");
  if (min_iterations < 1 || min_iterations > max_iterations) {
    fail("min_iterations must lie in [1, max_iterations]");
  }
  if (batch_size < 1) fail("batch_size must be at least 1");
  if (threads < 1) fail("threads must be at least 1");
  if (!(std::isfinite(stop_gap_tol) && stop_gap_tol >= 0.0)) fail("stop_gap_tol must be >= 0");
  if (!(std::isfinite(ub_confidence) && ub_confidence >= 0.0)) fail("ub_confidence must be >= 0");
}

CutPool empty_pool(const hydro::SystemCase& system, const Lattice& lattice) {
  return CutPool(lattice.stages(), lattice.openings(), system.state_dimension());
}

namespace {

void check_pool(const hydro::SystemCase& system, const Lattice& lattice, const CutPool& cuts) {
  if (cuts.stages() != lattice.stages() || cuts.openings() != lattice.openings() ||
      cuts.dimension() != system.state_dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "cut pool does not match the case");
  }
}

risk::WeightVector child_weights(const hydro::StageSolution& sol, const risk::RiskMeasure& measure,
                                 bool risk_adjusted, std::size_t openings) {
  if (!risk_adjusted) return risk::WeightVector::uniform(openings);
  return risk::sampling_weights_clamped(sol.betas, measure, nullptr);
}

PathRecord sample_path(const hydro::SystemCase& system, const Lattice& lattice, const CutPool& cuts,
                       const risk::RiskMeasure& measure, bool risk_adjusted, scenario::Rng rng) {
  PathRecord path;
  StateVector state = system.initial_state();
  risk::WeightVector weights(std::vector<double>{1.0});
  std::size_t opening = 0;
  for (std::size_t t = 0; t < lattice.stages(); ++t) {
    const hydro::StageSolution sol =
        hydro::solve_stage(system, t, state, lattice.noise(t, opening), cuts, measure);
    path.stages.push_back(StageRecord{opening, sol.state_out, sol.immediate_cost, weights});
    state = sol.state_out;
    if (t + 1 < lattice.stages()) {
      weights = child_weights(sol, measure, risk_adjusted, lattice.openings());
      opening = scenario::sample_opening(weights, rng);
    }
  }
  return path;
}

}  // namespace

std::vector<PathRecord> forward_pass(const hydro::SystemCase& system, const Lattice& lattice,
                                     const CutPool& cuts, const risk::RiskMeasure& measure,
                                     bool risk_adjusted, std::size_t iteration, std::size_t paths,
                                     std::uint64_t seed, std::size_t threads) {
  check_pool(system, lattice, cuts);
  std::vector<PathRecord> out(paths);
  detail::parallel_for(paths, threads, [&](std::size_t s) {
    out[s] = sample_path(system, lattice, cuts, measure, risk_adjusted,
                         scenario::Rng::for_path(seed, iteration, s));
  });
  return out;
}

std::size_t backward_pass(const hydro::SystemCase& system, const Lattice& lattice, CutPool& cuts,
                          const std::vector<PathRecord>& paths, const risk::RiskMeasure& measure,
                          std::size_t threads) {
  check_pool(system, lattice, cuts);
  const std::size_t T = lattice.stages();
  const std::size_t L = lattice.openings();
  for (const PathRecord& p : paths) {
    if (p.stages.size() != T) throw Error(ErrorCode::DimensionMismatch, "path length differs from T");
  }
  std::size_t added = 0;
  std::vector<Cut> batch(paths.size() * L);
  for (std::size_t t = T; t-- > 1;) {
    // Every solve at stage t reads pool index t and writes index t - 1.
    detail::parallel_for(batch.size(), threads, [&](std::size_t k) {
      const std::size_t s = k / L;
      const std::size_t l = k % L;
      const StateVector& x = paths[s].stages[t - 1].state_out;
      const hydro::StageSolution sol =
          hydro::solve_stage(system, t, x, lattice.noise(t, l), cuts, measure);
      batch[k] = Cut{sol.state_dual, x.flat(), sol.objective};
    });
    for (std::size_t k = 0; k < batch.size(); ++k) {
      cuts.add(t - 1, k % L, std::move(batch[k]));
      ++added;
    }
  }
  return added;
}

double lower_bound(const hydro::SystemCase& system, const Lattice& lattice, const CutPool& cuts,
                   const risk::RiskMeasure& measure) {
  check_pool(system, lattice, cuts);
  return hydro::solve_stage(system, 0, system.initial_state(), lattice.noise(0, 0), cuts, measure)
      .objective;
}

UpperBound upper_bound_estimate(const std::vector<PathRecord>& paths) {
  if (paths.empty()) throw Error(ErrorCode::EmptyBatch, "no paths to estimate an upper bound");
  const double n = static_cast<double>(paths.size());
  double sum = 0.0;
  for (const PathRecord& p : paths) sum += p.total_cost();
  const double mean = sum / n;
  double ss = 0.0;
  for (const PathRecord& p : paths) ss += (p.total_cost() - mean) * (p.total_cost() - mean);
  const double stderr_value = paths.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
  return UpperBound{mean, stderr_value, paths.size()};
}

TrainedPolicy train(const hydro::SystemCase& system, const Lattice& lattice,
                    const EngineConfig& config) {
  config.validate();
  system.validate();
  system.validate_lattice(lattice);
  const auto start = std::chrono::steady_clock::now();
  TrainedPolicy policy{empty_pool(system, lattice), config, {}, io::fingerprint(system, lattice)};
  for (std::size_t k = 1; k <= config.max_iterations; ++k) {
    const bool risk_adjusted = scenario::samples_risk_adjusted(config.sampler, k);
    const auto paths = forward_pass(system, lattice, policy.cuts, config.measure, risk_adjusted, k,
                                    config.batch_size, config.seed, config.threads);
    BoundsEntry entry;
    entry.iteration = k;
    entry.lower_bound = lower_bound(system, lattice, policy.cuts, config.measure);
    entry.sampler = risk_adjusted ? scenario::SamplerMode::RiskAdjusted : scenario::SamplerMode::Uniform;
    const bool skip_ub = config.sampler == scenario::SamplerMode::Alternating && !risk_adjusted;
    if (!skip_ub) entry.upper = upper_bound_estimate(paths);
    entry.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    policy.bounds.push_back(entry);

    const bool eligible = entry.upper && (risk_adjusted || config.measure.is_neutral());
    if (eligible && k >= config.min_iterations) {
      const UpperBound& ub = *entry.upper;
      const double band = ub.mean - config.ub_confidence * ub.std_error -
                          config.stop_gap_tol * std::max(1.0, std::abs(ub.mean));
      if (entry.lower_bound >= band) break;
    }
    if (k == config.max_iterations) break;
    backward_pass(system, lattice, policy.cuts, paths, config.measure, config.threads);
  }
  return policy;
}

namespace {

double node_value(const hydro::SystemCase& system, const Lattice& lattice, const CutPool& cuts,
                  const risk::RiskMeasure& measure, std::size_t t, const StateVector& state,
                  std::size_t opening) {
  const hydro::StageSolution sol =
      hydro::solve_stage(system, t, state, lattice.noise(t, opening), cuts, measure);
  if (t + 1 == lattice.stages()) return sol.immediate_cost;
  const risk::WeightVector w = risk::sampling_weights_clamped(sol.betas, measure, nullptr);
  double future = 0.0;
  for (std::size_t l = 0; l < w.size(); ++l) {
    if (w[l] == 0.0) continue;
    future += w[l] * node_value(system, lattice, cuts, measure, t + 1, sol.state_out, l);
  }
  return sol.immediate_cost + future;
}

}  // namespace

double evaluate_policy_exact(const hydro::SystemCase& system, const Lattice& lattice,
                             const CutPool& cuts, const risk::RiskMeasure& measure,
                             std::size_t cap) {
  check_pool(system, lattice, cuts);
  if (!scenario::path_count(lattice, cap)) {
    throw Error(ErrorCode::TreeTooLarge, "policy evaluation tree exceeds the enumeration cap");
  }
  return node_value(system, lattice, cuts, measure, 0, system.initial_state(), 0);
}

}  // namespace rasddp::sddp

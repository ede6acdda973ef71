#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "rasddp/risk.hpp"
#include "rasddp/state.hpp"

namespace rasddp::scenario {

/// One opening's uncertain data: inflow noise per hydro (volume), renewable
/// capacity per renewable plant (power), and optionally demand per bus.
struct NoiseRealization {
  std::vector<double> inflow;
  std::vector<double> renewable_cap;
  std::optional<std::vector<double>> demand;

  friend bool operator==(const NoiseRealization&, const NoiseRealization&) = default;
};

/// Recombining scenario lattice. Stage indices are 0-based; stage 0 carries a
/// single deterministic realization and every later stage has `openings` of them.
class Lattice {
 public:
  Lattice() = default;
  Lattice(std::size_t openings, std::vector<std::vector<NoiseRealization>> noises);

  std::size_t stages() const { return noises_.size(); }
  std::size_t openings() const { return openings_; }
  std::size_t openings_at(std::size_t stage) const { return stage == 0 ? 1 : openings_; }
  const NoiseRealization& noise(std::size_t stage, std::size_t opening) const;
  const std::vector<std::vector<NoiseRealization>>& noises() const { return noises_; }

  friend bool operator==(const Lattice&, const Lattice&) = default;

 private:
  std::size_t openings_ = 0;
  std::vector<std::vector<NoiseRealization>> noises_;
};

/// Per-hydro autoregressive inflow coefficients phi_{j,1..p_j}.
struct ARProcess {
  std::vector<std::vector<double>> coefficients;

  std::size_t max_lag() const;
};

/// a_j = sum_k phi_{j,k} a_j^{t-k} + noise_j, with history newest first.
std::vector<double> inflow_transition(const ARProcess& ar,
                                      const std::vector<std::vector<double>>& lag_history,
                                      const NoiseRealization& noise);

enum class SamplerMode { Uniform, RiskAdjusted, Alternating };

std::string_view to_string(SamplerMode mode) noexcept;
SamplerMode parse_sampler_mode(std::string_view text);

/// Alternating mode uses risk-adjusted sampling on even iterations (1-based)
/// and uniform sampling on odd ones.
bool samples_risk_adjusted(SamplerMode mode, std::size_t iteration);

/// Random stream for one forward path: std::mt19937_64 seeded through
/// std::seed_seq with the 32-bit halves of (seed, iteration, path). Both are
/// fully specified by the C++ standard, so streams reproduce across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  static Rng for_path(std::uint64_t seed, std::uint64_t iteration, std::uint64_t path);

  /// Uniform double in [0, 1) built from the top 53 bits of one draw.
  double uniform();

 private:
  explicit Rng(std::seed_seq& seq) : engine_(seq) {}
  std::mt19937_64 engine_;
};

/// Inverse-CDF sampling with a single uniform draw.
std::size_t sample_opening(const risk::WeightVector& weights, Rng& rng);

inline constexpr std::size_t kDefaultPathCap = 100000;

/// All opening sequences for stages 1..T-1 in lexicographic order.
std::vector<std::vector<std::size_t>> enumerate_paths(const Lattice& lattice,
                                                      std::size_t cap = kDefaultPathCap);

/// Number of leaves L^(T-1), or nullopt when it exceeds `cap`.
std::optional<std::size_t> path_count(const Lattice& lattice, std::size_t cap);

struct StageRecord {
  std::size_t opening = 0;
  StateVector state_out;
  double immediate_cost = 0.0;
  risk::WeightVector weights;  // distribution the opening was drawn from

  friend bool operator==(const StageRecord&, const StageRecord&) = default;
};

struct PathRecord {
  std::vector<StageRecord> stages;

  double total_cost() const;
  friend bool operator==(const PathRecord&, const PathRecord&) = default;
};

}  // namespace rasddp::scenario

#include "rasddp/scenario.hpp"

#include <algorithm>
#include <string>

#include "rasddp/error.hpp"

namespace rasddp::scenario {

Lattice::Lattice(std::size_t openings, std::vector<std::vector<NoiseRealization>> noises)
    : openings_(openings), noises_(std::move(noises)) {
  if (noises_.empty()) throw Error(ErrorCode::InvalidArgument, "lattice needs at least one stage");
  if (openings_ == 0) throw Error(ErrorCode::InvalidArgument, "lattice needs at least one opening");
  if (noises_[0].size() != 1) {
    throw Error(ErrorCode::InvalidArgument, "first stage must have exactly one realization");
  }
  for (std::size_t t = 1; t < noises_.size(); ++t) {
    if (noises_[t].size() != openings_) {
      throw Error(ErrorCode::InvalidArgument,
                  "stage " + std::to_string(t) + " has " + std::to_string(noises_[t].size()) +
                      " realizations, expected " + std::to_string(openings_));
    }
  }
  for (const auto& stage : noises_) {
    for (const NoiseRealization& n : stage) {
      for (double r : n.renewable_cap) {
        if (!(r >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative renewable capacity");
      }
      if (n.demand) {
        for (double d : *n.demand) {
          if (!(d >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative demand");
        }
      }
    }
  }
}

const NoiseRealization& Lattice::noise(std::size_t stage, std::size_t opening) const {
  if (stage >= stages() || opening >= openings_at(stage)) {
    throw Error(ErrorCode::InvalidArgument, "noise index out of range");
  }
  return noises_[stage][opening];
}

std::size_t ARProcess::max_lag() const {
  std::size_t lag = 0;
  for (const auto& c : coefficients) lag = std::max(lag, c.size());
  return lag;
}

std::vector<double> inflow_transition(const ARProcess& ar,
                                      const std::vector<std::vector<double>>& lag_history,
                                      const NoiseRealization& noise) {
  const std::size_t hydros = ar.coefficients.size();
  if (noise.inflow.size() != hydros || lag_history.size() != hydros) {
    throw Error(ErrorCode::DimensionMismatch, "inflow transition dimension mismatch");
  }
  std::vector<double> inflow(hydros);
  for (std::size_t j = 0; j < hydros; ++j) {
    const auto& phi = ar.coefficients[j];
    if (lag_history[j].size() < phi.size()) {
      throw Error(ErrorCode::InsufficientHistory,
                  "hydro " + std::to_string(j) + " needs " + std::to_string(phi.size()) + " lags");
    }
    double a = noise.inflow[j];
    for (std::size_t k = 0; k < phi.size(); ++k) a += phi[k] * lag_history[j][k];
    inflow[j] = a;
  }
  return inflow;
}

std::string_view to_string(SamplerMode mode) noexcept {
  switch (mode) {
    case SamplerMode::Uniform: return "uniform";
    case SamplerMode::RiskAdjusted: return "risk";
    case SamplerMode::Alternating: return "alternating";
  }
  return "?";
}

SamplerMode parse_sampler_mode(std::string_view text) {
  if (text == "uniform") return SamplerMode::Uniform;
  if (text == "risk") return SamplerMode::RiskAdjusted;
  if (text == "alternating") return SamplerMode::Alternating;
  throw Error(ErrorCode::InvalidArgument, "unknown sampler '" + std::string(text) + "'");
}

bool samples_risk_adjusted(SamplerMode mode, std::size_t iteration) {
  switch (mode) {
    case SamplerMode::Uniform: return false;
    case SamplerMode::RiskAdjusted: return true;
    case SamplerMode::Alternating: return iteration % 2 == 0;
  }
  return false;
}

namespace {
std::seed_seq make_seq(std::initializer_list<std::uint64_t> words) {
  std::vector<std::uint32_t> halves;
  for (std::uint64_t w : words) {
    halves.push_back(static_cast<std::uint32_t>(w & 0xffffffffu));
    halves.push_back(static_cast<std::uint32_t>(w >> 32));
  }
  return std::seed_seq(halves.begin(), halves.end());
}
}  // namespace

Rng::Rng(std::uint64_t seed) : engine_() {
  std::seed_seq seq = make_seq({seed});
  engine_.seed(seq);
}

Rng Rng::for_path(std::uint64_t seed, std::uint64_t iteration, std::uint64_t path) {
  std::seed_seq seq = make_seq({seed, iteration, path});
  return Rng(seq);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::size_t sample_opening(const risk::WeightVector& weights, Rng& rng) {
  if (weights.size() == 0) throw Error(ErrorCode::EmptyInput, "no openings to sample");
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l] <= 0.0) continue;
    cumulative += weights[l];
    last_positive = l;
    if (u < cumulative) return l;
  }
  // u fell in the rounding gap above the final cumulative sum.
  return last_positive;
}

std::optional<std::size_t> path_count(const Lattice& lattice, std::size_t cap) {
  std::size_t count = 1;
  for (std::size_t t = 1; t < lattice.stages(); ++t) {
    if (count > cap / lattice.openings()) return std::nullopt;
    count *= lattice.openings();
  }
  if (count > cap) return std::nullopt;
  return count;
}

std::vector<std::vector<std::size_t>> enumerate_paths(const Lattice& lattice, std::size_t cap) {
  const auto count = path_count(lattice, cap);
  if (!count) {
    throw Error(ErrorCode::TreeTooLarge,
                "scenario tree exceeds the enumeration cap of " + std::to_string(cap));
  }
  const std::size_t depth = lattice.stages() - 1;
  std::vector<std::vector<std::size_t>> paths;
  paths.reserve(*count);
  std::vector<std::size_t> current(depth, 0);
  for (std::size_t p = 0; p < *count; ++p) {
    paths.push_back(current);
    for (std::size_t k = depth; k-- > 0;) {
      if (++current[k] < lattice.openings()) break;
      current[k] = 0;
    }
  }
  return paths;
}

double PathRecord::total_cost() const {
  double total = 0.0;
  for (const StageRecord& s : stages) total += s.immediate_cost;
  return total;
}

}  // namespace rasddp::scenario

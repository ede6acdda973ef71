#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rasddp/cuts.hpp"
#include "rasddp/lp.hpp"
#include "rasddp/risk.hpp"
#include "rasddp/scenario.hpp"
#include "rasddp/state.hpp"

namespace rasddp::hydro {

struct Bus {
  std::string name;
  // One value per stage, or a single value used for every stage.
  std::vector<double> demand;

  friend bool operator==(const Bus&, const Bus&) = default;
};

/// Interconnection usable in both directions up to `capacity`.
struct Line {
  std::size_t from = 0;
  std::size_t to = 0;
  double capacity = 0.0;

  friend bool operator==(const Line&, const Line&) = default;
};

struct Thermal {
  std::string name;
  std::size_t bus = 0;
  double cost = 0.0;
  double capacity = 0.0;

  friend bool operator==(const Thermal&, const Thermal&) = default;
};

struct HydroPlant {
  std::string name;
  std::size_t bus = 0;
  double max_storage = 0.0;
  double max_turbine = 0.0;
  double production = 0.0;               // power per unit of turbined volume
  std::vector<std::size_t> upstream;     // plants whose releases flow into this one
  std::vector<double> ar_coefficients;   // phi_1..phi_p
  double initial_storage = 0.0;
  std::vector<double> initial_inflows;   // newest first, at least p entries

  friend bool operator==(const HydroPlant&, const HydroPlant&) = default;
};

struct Renewable {
  std::string name;
  std::size_t bus = 0;

  friend bool operator==(const Renewable&, const Renewable&) = default;
};

struct SystemCase {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Thermal> thermals;
  std::vector<HydroPlant> hydros;
  std::vector<Renewable> renewables;
  std::optional<double> deficit_cost;  // defaults to 10x the largest thermal cost
  double beta_lower_bound = 0.0;       // lower bound on each opening's cost-to-go variable

  double deficit_penalty() const;
  double demand(std::size_t bus, std::size_t stage, const scenario::NoiseRealization& noise) const;
  scenario::ARProcess ar_process() const;
  StateVector initial_state() const;
  std::size_t state_dimension() const;

  /// Throws SchemaError, DanglingReference or CyclicCascade.
  void validate() const;
  /// Checks noise dimensions and signs against this system.
  void validate_lattice(const scenario::Lattice& lattice) const;
  /// Storage bounds and lag counts.
  void validate_state(const StateVector& state) const;

  friend bool operator==(const SystemCase&, const SystemCase&) = default;
};

/// Affine expression over LP variables.
struct LinearExpr {
  std::vector<lp::Term> terms;
  double constant = 0.0;
};

/// Variables of one stage's physics (energy balance, water balance, AR inflow
/// and bounds). State-out coordinates follow the StateVector flat layout.
struct PhysicsBlock {
  std::vector<lp::VarId> thermal;
  std::vector<lp::VarId> deficit;
  std::vector<lp::VarId> renewable;
  std::vector<lp::VarId> flow_forward;
  std::vector<lp::VarId> flow_backward;
  std::vector<lp::VarId> turbine;
  std::vector<lp::VarId> spill;
  std::vector<lp::VarId> storage_out;
  std::vector<lp::VarId> inflow;
  std::vector<lp::Term> immediate_cost;
  std::vector<LinearExpr> state_out;
};

/// Appends one stage of physics to `program`. `state_in` holds one expression
/// per flat state coordinate. Variable costs are left at zero; the caller
/// places `immediate_cost` where it belongs. With a `label_prefix` the
/// variables and rows are tagged for lookup.
PhysicsBlock add_stage_physics(lp::LinearProgram& program, const SystemCase& system,
                               std::size_t stage, std::span<const LinearExpr> state_in,
                               const scenario::NoiseRealization& noise,
                               const std::optional<std::string>& label_prefix = std::nullopt);

struct StageLayout {
  PhysicsBlock physics;
  std::vector<lp::VarId> state_copy;
  std::vector<lp::RowId> state_copy_rows;
  std::vector<lp::VarId> beta;  // empty at the last stage
  std::optional<lp::VarId> cvar_z;
  std::vector<lp::VarId> cvar_delta;
  std::vector<std::vector<Cut>> future_cuts;  // per opening, as used for the cut rows
  double beta_floor = 0.0;
};

struct StageProblem {
  lp::LinearProgram program;
  StageLayout layout;
};

/// Stage subproblem with the multicut nested-risk future term. `cuts` provides
/// the stage and opening counts; stage indices are 0-based.
StageProblem build_stage_lp(const SystemCase& system, std::size_t stage, const StateVector& state_in,
                            const scenario::NoiseRealization& noise, const CutPool& cuts,
                            const risk::RiskMeasure& measure);

struct StageSolution {
  double objective = 0.0;
  double immediate_cost = 0.0;
  StateVector state_out;
  std::vector<double> state_dual;  // d objective / d state_in, flat layout
  // Per-opening outer approximation max(floor, max_cuts) at state_out; equals the
  // LP beta whenever beta is priced. Empty at the last stage.
  std::vector<double> betas;
};

/// Extracts a StageSolution from an optimal solve of `problem`.
StageSolution extract_stage_solution(const StageProblem& problem, const lp::LPSolution& solution,
                                     const StateVector& shape);

/// Builds and solves; a non-optimal status raises StageInfeasible.
StageSolution solve_stage(const SystemCase& system, std::size_t stage, const StateVector& state_in,
                          const scenario::NoiseRealization& noise, const CutPool& cuts,
                          const risk::RiskMeasure& measure);

}  // namespace rasddp::hydro

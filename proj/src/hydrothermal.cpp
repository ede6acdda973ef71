#include "rasddp/hydrothermal.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <unordered_set>

#include "rasddp/error.hpp"

namespace rasddp::hydro {

namespace {

void require(bool ok, ErrorCode code, const std::string& message) {
  if (!ok) throw Error(code, message);
}

bool nonnegative(double v) { return std::isfinite(v) && v >= 0.0; }

std::string tag(const std::optional<std::string>& prefix, const std::string& name) {
  return prefix ? *prefix + name : std::string{};
}

}  // namespace

double SystemCase::deficit_penalty() const {
  if (deficit_cost) return *deficit_cost;
  double worst = 0.0;
  for (const Thermal& g : thermals) worst = std::max(worst, g.cost);
  return worst > 0.0 ? 10.0 * worst : 1000.0;
}

double SystemCase::demand(std::size_t bus, std::size_t stage,
                          const scenario::NoiseRealization& noise) const {
  if (noise.demand) return (*noise.demand)[bus];
  const auto& d = buses[bus].demand;
  return d.size() == 1 ? d[0] : d.at(stage);
}

scenario::ARProcess SystemCase::ar_process() const {
  scenario::ARProcess ar;
  for (const HydroPlant& h : hydros) ar.coefficients.push_back(h.ar_coefficients);
  return ar;
}

StateVector SystemCase::initial_state() const {
  StateVector s;
  for (const HydroPlant& h : hydros) {
    s.storages.push_back(h.initial_storage);
    const auto p = static_cast<long>(h.ar_coefficients.size());
    s.inflow_lags.emplace_back(h.initial_inflows.begin(), h.initial_inflows.begin() + p);
  }
  return s;
}

std::size_t SystemCase::state_dimension() const {
  std::size_t d = hydros.size();
  for (const HydroPlant& h : hydros) d += h.ar_coefficients.size();
  return d;
}

void SystemCase::validate() const {
  require(!buses.empty(), ErrorCode::SchemaError, "system needs at least one bus");
  for (const Bus& b : buses) {
    require(!b.demand.empty(), ErrorCode::SchemaError, "bus " + b.name + " has no demand");
    for (double d : b.demand) {
      require(nonnegative(d), ErrorCode::SchemaError, "bus " + b.name + " has negative demand");
    }
  }
  for (const Line& l : lines) {
    require(l.from < buses.size() && l.to < buses.size(), ErrorCode::DanglingReference,
            "line refers to a missing bus");
    require(l.from != l.to, ErrorCode::SchemaError, "line connects a bus to itself");
    require(nonnegative(l.capacity), ErrorCode::SchemaError, "line capacity must be >= 0");
  }
  double max_cost = 0.0;
  for (const Thermal& g : thermals) {
    require(g.bus < buses.size(), ErrorCode::DanglingReference, "thermal " + g.name + " bus");
    require(nonnegative(g.cost), ErrorCode::SchemaError, "thermal " + g.name + " cost must be >= 0");
    require(nonnegative(g.capacity), ErrorCode::SchemaError,
            "thermal " + g.name + " capacity must be >= 0");
    max_cost = std::max(max_cost, g.cost);
  }
  for (const Renewable& r : renewables) {
    require(r.bus < buses.size(), ErrorCode::DanglingReference, "renewable " + r.name + " bus");
  }
  for (const HydroPlant& h : hydros) {
    require(h.bus < buses.size(), ErrorCode::DanglingReference, "hydro " + h.name + " bus");
    require(nonnegative(h.max_storage) && nonnegative(h.max_turbine) && nonnegative(h.production),
            ErrorCode::SchemaError, "hydro " + h.name + " capacities must be >= 0");
    require(h.initial_storage >= 0.0 && h.initial_storage <= h.max_storage, ErrorCode::SchemaError,
            "hydro " + h.name + " initial storage outside [0, max_storage]");
    for (double phi : h.ar_coefficients) {
      require(nonnegative(phi), ErrorCode::SchemaError,
              "hydro " + h.name + " AR coefficients must be >= 0");
    }
    require(h.initial_inflows.size() >= h.ar_coefficients.size(), ErrorCode::InsufficientHistory,
            "hydro " + h.name + " needs one initial inflow per AR lag");
    for (double a : h.initial_inflows) {
      require(nonnegative(a), ErrorCode::SchemaError, "hydro " + h.name + " initial inflow < 0");
    }
    for (std::size_t up : h.upstream) {
      require(up < hydros.size(), ErrorCode::DanglingReference,
              "hydro " + h.name + " has a missing upstream plant");
    }
  }
  // Depth-first search for a cycle in the upstream relation.
  std::vector<int> mark(hydros.size(), 0);
  std::function<void(std::size_t)> visit = [&](std::size_t j) {
    if (mark[j] == 2) return;
    require(mark[j] == 0, ErrorCode::CyclicCascade,
            "hydro cascade has a cycle through " + hydros[j].name);
    mark[j] = 1;
    for (std::size_t up : hydros[j].upstream) visit(up);
    mark[j] = 2;
  };
  for (std::size_t j = 0; j < hydros.size(); ++j) visit(j);

  if (deficit_cost) {
    require(std::isfinite(*deficit_cost) && *deficit_cost > max_cost, ErrorCode::SchemaError,
            "deficit cost must exceed every thermal cost");
  }
  require(std::isfinite(beta_lower_bound), ErrorCode::SchemaError,
          "beta lower bound must be finite");
}

void SystemCase::validate_lattice(const scenario::Lattice& lattice) const {
  for (const Bus& b : buses) {
    require(b.demand.size() == 1 || b.demand.size() == lattice.stages(), ErrorCode::SchemaError,
            "bus " + b.name + " demand must have 1 or " + std::to_string(lattice.stages()) +
                " entries");
  }
  for (std::size_t t = 0; t < lattice.stages(); ++t) {
    for (std::size_t l = 0; l < lattice.openings_at(t); ++l) {
      const auto& n = lattice.noise(t, l);
      const std::string where =
          "noise at stage " + std::to_string(t) + ", opening " + std::to_string(l);
      require(n.inflow.size() == hydros.size(), ErrorCode::DimensionMismatch,
              where + ": expected one inflow per hydro");
      require(n.renewable_cap.size() == renewables.size(), ErrorCode::DimensionMismatch,
              where + ": expected one capacity per renewable");
      if (n.demand) {
        require(n.demand->size() == buses.size(), ErrorCode::DimensionMismatch,
                where + ": expected one demand per bus");
      }
      for (double e : n.inflow) {
        // Nonnegative noise with nonnegative AR data keeps inflows >= 0, which
        // together with free spill and deficit guarantees stage feasibility.
        require(nonnegative(e), ErrorCode::SchemaError, where + ": inflow noise must be >= 0");
      }
    }
  }
}

void SystemCase::validate_state(const StateVector& state) const {
  require(state.storages.size() == hydros.size() && state.inflow_lags.size() == hydros.size(),
          ErrorCode::DimensionMismatch, "state does not match the number of hydro plants");
  for (std::size_t j = 0; j < hydros.size(); ++j) {
    require(state.inflow_lags[j].size() == hydros[j].ar_coefficients.size(),
            ErrorCode::DimensionMismatch, "state lags do not match the AR order");
    require(std::isfinite(state.storages[j]), ErrorCode::InvalidArgument, "non-finite storage");
    for (double a : state.inflow_lags[j]) {
      require(std::isfinite(a), ErrorCode::InvalidArgument, "non-finite inflow lag");
    }
  }
}

PhysicsBlock add_stage_physics(lp::LinearProgram& program, const SystemCase& system,
                               std::size_t stage, std::span<const LinearExpr> state_in,
                               const scenario::NoiseRealization& noise,
                               const std::optional<std::string>& prefix) {
  using lp::kInf;
  using lp::Sense;
  using lp::Term;
  if (state_in.size() != system.state_dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "state-in has wrong dimension");
  }
  const std::size_t nb = system.buses.size();
  const std::size_t nh = system.hydros.size();
  PhysicsBlock block;
  std::vector<std::vector<Term>> balance(nb);

  for (const Thermal& g : system.thermals) {
    const lp::VarId v = program.add_variable(0.0, g.capacity, 0.0, tag(prefix, "thermal[" + g.name + "]"));
    block.thermal.push_back(v);
    block.immediate_cost.push_back({v, g.cost});
    balance[g.bus].push_back({v, 1.0});
  }
  const double penalty = system.deficit_penalty();
  for (std::size_t n = 0; n < nb; ++n) {
    const lp::VarId v =
        program.add_variable(0.0, kInf, 0.0, tag(prefix, "deficit[" + system.buses[n].name + "]"));
    block.deficit.push_back(v);
    block.immediate_cost.push_back({v, penalty});
    balance[n].push_back({v, 1.0});
  }
  for (std::size_t r = 0; r < system.renewables.size(); ++r) {
    const Renewable& ren = system.renewables[r];
    const lp::VarId v = program.add_variable(0.0, noise.renewable_cap[r], 0.0,
                                             tag(prefix, "renewable[" + ren.name + "]"));
    block.renewable.push_back(v);
    balance[ren.bus].push_back({v, 1.0});
  }
  for (std::size_t k = 0; k < system.lines.size(); ++k) {
    const Line& line = system.lines[k];
    const std::string id = std::to_string(k);
    const lp::VarId fwd = program.add_variable(0.0, line.capacity, 0.0, tag(prefix, "flow+[" + id + "]"));
    const lp::VarId bwd = program.add_variable(0.0, line.capacity, 0.0, tag(prefix, "flow-[" + id + "]"));
    block.flow_forward.push_back(fwd);
    block.flow_backward.push_back(bwd);
    balance[line.from].push_back({fwd, -1.0});
    balance[line.to].push_back({fwd, 1.0});
    balance[line.to].push_back({bwd, -1.0});
    balance[line.from].push_back({bwd, 1.0});
  }
  for (const HydroPlant& h : system.hydros) {
    block.turbine.push_back(
        program.add_variable(0.0, h.max_turbine, 0.0, tag(prefix, "turbine[" + h.name + "]")));
    block.spill.push_back(program.add_variable(0.0, kInf, 0.0, tag(prefix, "spill[" + h.name + "]")));
    block.storage_out.push_back(
        program.add_variable(0.0, h.max_storage, 0.0, tag(prefix, "storage_out[" + h.name + "]")));
    block.inflow.push_back(program.add_variable(-kInf, kInf, 0.0, tag(prefix, "inflow[" + h.name + "]")));
    balance[h.bus].push_back({block.turbine.back(), h.production});
  }

  for (std::size_t n = 0; n < nb; ++n) {
    program.add_row(std::move(balance[n]), Sense::Equal, system.demand(n, stage, noise),
                    tag(prefix, "balance[" + system.buses[n].name + "]"));
  }

  // Flat offsets of each hydro's lag block.
  std::vector<std::size_t> lag_offset(nh);
  std::size_t offset = nh;
  for (std::size_t j = 0; j < nh; ++j) {
    lag_offset[j] = offset;
    offset += system.hydros[j].ar_coefficients.size();
  }

  for (std::size_t j = 0; j < nh; ++j) {
    const HydroPlant& h = system.hydros[j];
    // storage_out - storage_in + turbine + spill - upstream releases - inflow = 0
    std::vector<Term> mass{{block.storage_out[j], 1.0},
                           {block.turbine[j], 1.0},
                           {block.spill[j], 1.0},
                           {block.inflow[j], -1.0}};
    for (const Term& t : state_in[j].terms) mass.push_back({t.var, -t.coef});
    for (std::size_t up : h.upstream) {
      mass.push_back({block.turbine[up], -1.0});
      mass.push_back({block.spill[up], -1.0});
    }
    program.add_row(std::move(mass), Sense::Equal, state_in[j].constant,
                    tag(prefix, "mass[" + h.name + "]"));

    // inflow - sum_k phi_k lag_k = noise
    std::vector<Term> ar{{block.inflow[j], 1.0}};
    double rhs = noise.inflow[j];
    for (std::size_t k = 0; k < h.ar_coefficients.size(); ++k) {
      const LinearExpr& lag = state_in[lag_offset[j] + k];
      for (const Term& t : lag.terms) ar.push_back({t.var, -h.ar_coefficients[k] * t.coef});
      rhs += h.ar_coefficients[k] * lag.constant;
    }
    program.add_row(std::move(ar), Sense::Equal, rhs, tag(prefix, "inflow_ar[" + h.name + "]"));
  }

  block.state_out.resize(system.state_dimension());
  for (std::size_t j = 0; j < nh; ++j) {
    block.state_out[j] = LinearExpr{{{block.storage_out[j], 1.0}}, 0.0};
    const std::size_t p = system.hydros[j].ar_coefficients.size();
    if (p == 0) continue;
    block.state_out[lag_offset[j]] = LinearExpr{{{block.inflow[j], 1.0}}, 0.0};
    for (std::size_t k = 1; k < p; ++k) {
      block.state_out[lag_offset[j] + k] = state_in[lag_offset[j] + k - 1];
    }
  }
  return block;
}

namespace {

// Exact-duplicate cuts add identical rows; only the first is kept in the LP.
struct CutKey {
  const Cut* cut;
  bool operator==(const CutKey& o) const {
    return cut->constant() == o.cut->constant() && cut->gradient == o.cut->gradient;
  }
};

struct CutKeyHash {
  std::size_t operator()(const CutKey& k) const {
    std::size_t h = std::hash<double>{}(k.cut->constant());
    for (double g : k.cut->gradient) h = h * 1099511628211ull ^ std::hash<double>{}(g);
    return h;
  }
};

}  // namespace

StageProblem build_stage_lp(const SystemCase& system, std::size_t stage, const StateVector& state_in,
                            const scenario::NoiseRealization& noise, const CutPool& cuts,
                            const risk::RiskMeasure& measure) {
  using lp::kInf;
  using lp::Sense;
  if (stage >= cuts.stages()) throw Error(ErrorCode::InvalidArgument, "stage out of range");
  system.validate_state(state_in);
  if (cuts.dimension() != system.state_dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "cut pool dimension does not match the system");
  }
  if (noise.inflow.size() != system.hydros.size() ||
      noise.renewable_cap.size() != system.renewables.size() ||
      (noise.demand && noise.demand->size() != system.buses.size())) {
    throw Error(ErrorCode::DimensionMismatch, "noise does not match the system");
  }

  StageProblem problem;
  lp::LinearProgram& program = problem.program;
  StageLayout& layout = problem.layout;
  const std::vector<double> x_in = state_in.flat();

  std::vector<LinearExpr> in_exprs;
  for (std::size_t k = 0; k < x_in.size(); ++k) {
    const std::string id = std::to_string(k);
    const lp::VarId copy = program.add_variable(-kInf, kInf, 0.0, "state_copy[" + id + "]");
    layout.state_copy.push_back(copy);
    layout.state_copy_rows.push_back(
        program.add_row({{copy, 1.0}}, Sense::Equal, x_in[k], "state_copy[" + id + "]"));
    in_exprs.push_back(LinearExpr{{{copy, 1.0}}, 0.0});
  }

  layout.physics = add_stage_physics(program, system, stage, in_exprs, noise, std::string{});
  for (const lp::Term& t : layout.physics.immediate_cost) {
    program.set_cost(t.var, program.cost(t.var) + t.coef);
  }

  if (!cuts.has_future(stage)) return problem;

  const std::size_t L = cuts.openings();
  const double Ld = static_cast<double>(L);
  const double lambda = measure.lambda();
  const double tail = lambda / ((1.0 - measure.alpha()) * Ld);
  for (std::size_t l = 0; l < L; ++l) {
    layout.beta.push_back(program.add_variable(system.beta_lower_bound, kInf, (1.0 - lambda) / Ld,
                                               "beta[" + std::to_string(l) + "]"));
  }
  if (lambda > 0.0) {
    layout.cvar_z = program.add_variable(-kInf, kInf, lambda, "cvar_z");
    for (std::size_t l = 0; l < L; ++l) {
      const std::string id = std::to_string(l);
      const lp::VarId delta = program.add_variable(0.0, kInf, tail, "cvar_delta[" + id + "]");
      layout.cvar_delta.push_back(delta);
      // delta_l >= beta_l - z
      program.add_row({{delta, 1.0}, {layout.beta[l], -1.0}, {*layout.cvar_z, 1.0}},
                      Sense::GreaterEqual, 0.0, "cvar[" + id + "]");
    }
  }

  const auto& out = layout.physics.state_out;
  layout.beta_floor = system.beta_lower_bound;
  layout.future_cuts.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    std::unordered_set<CutKey, CutKeyHash> seen;
    for (const Cut& cut : cuts.cuts(stage, l)) {
      if (!seen.insert(CutKey{&cut}).second) continue;
      layout.future_cuts[l].push_back(cut);
      // beta_l - gradient' x_out >= intercept - gradient' anchor
      std::vector<lp::Term> row{{layout.beta[l], 1.0}};
      double rhs = cut.constant();
      for (std::size_t k = 0; k < out.size(); ++k) {
        if (cut.gradient[k] == 0.0) continue;
        for (const lp::Term& t : out[k].terms) row.push_back({t.var, -cut.gradient[k] * t.coef});
        rhs -= cut.gradient[k] * out[k].constant;
      }
      program.add_row(std::move(row), Sense::GreaterEqual, rhs);
    }
  }
  return problem;
}

StageSolution extract_stage_solution(const StageProblem& problem, const lp::LPSolution& solution,
                                     const StateVector& shape) {
  if (!solution.optimal()) throw Error(ErrorCode::NotOptimal, "stage solution is not optimal");
  const StageLayout& layout = problem.layout;
  StageSolution out;
  out.objective = solution.objective;
  for (const lp::Term& t : layout.physics.immediate_cost) {
    out.immediate_cost += t.coef * solution.value(t.var);
  }
  std::vector<double> flat;
  for (const LinearExpr& e : layout.physics.state_out) {
    double v = e.constant;
    for (const lp::Term& t : e.terms) v += t.coef * solution.value(t.var);
    flat.push_back(v);
  }
  out.state_out = StateVector::from_flat(flat, shape);
  // Clip round-off so the next stage sees an in-bounds storage.
  const auto& storage_vars = layout.physics.storage_out;
  for (std::size_t j = 0; j < storage_vars.size(); ++j) {
    out.state_out.storages[j] = std::clamp(out.state_out.storages[j],
                                           problem.program.lower(storage_vars[j]),
                                           problem.program.upper(storage_vars[j]));
  }
  for (lp::RowId r : layout.state_copy_rows) out.state_dual.push_back(solution.dual(r));
  const std::vector<double> x_out = out.state_out.flat();
  for (std::size_t l = 0; l < layout.beta.size(); ++l) {
    double envelope = layout.beta_floor;
    for (const Cut& cut : layout.future_cuts[l]) envelope = std::max(envelope, cut.value_at(x_out));
    out.betas.push_back(envelope);
  }
  return out;
}

StageSolution solve_stage(const SystemCase& system, std::size_t stage, const StateVector& state_in,
                          const scenario::NoiseRealization& noise, const CutPool& cuts,
                          const risk::RiskMeasure& measure) {
  const StageProblem problem = build_stage_lp(system, stage, state_in, noise, cuts, measure);
  const lp::LPSolution solution = lp::solve(problem.program);
  if (!solution.optimal()) {
    throw Error(ErrorCode::StageInfeasible,
                "stage " + std::to_string(stage) + " subproblem is " +
                    std::string(lp::to_string(solution.status)));
  }
  return extract_stage_solution(problem, solution, state_in);
}

}  // namespace rasddp::hydro

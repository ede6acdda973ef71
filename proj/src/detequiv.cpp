#include "rasddp/detequiv.hpp"

#include <limits>
#include <string>
#include <vector>

#include "rasddp/error.hpp"

namespace rasddp::detequiv {

using hydro::LinearExpr;

std::size_t subtree_nodes(const scenario::Lattice& lattice, std::size_t stage) {
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  std::size_t total = 0;
  std::size_t layer = 1;
  for (std::size_t t = stage; t < lattice.stages(); ++t) {
    if (total > kMax - layer) return kMax;
    total += layer;
    if (t + 1 < lattice.stages()) {
      if (layer > kMax / lattice.openings()) return kMax;
      layer *= lattice.openings();
    }
  }
  return total;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const hydro::SystemCase& system, const scenario::Lattice& lattice,
              const risk::RiskMeasure& measure, lp::LinearProgram& program)
      : system_(system), lattice_(lattice), measure_(measure), program_(program) {}

  // Returns the node's total cost: immediate cost plus the risk term over its children.
  std::vector<lp::Term> node(std::size_t t, std::span<const LinearExpr> state_in, std::size_t opening) {
    const hydro::PhysicsBlock physics =
        hydro::add_stage_physics(program_, system_, t, state_in, lattice_.noise(t, opening));
    std::vector<lp::Term> cost = physics.immediate_cost;
    if (t + 1 == lattice_.stages()) return cost;

    const std::size_t L = lattice_.openings();
    const double Ld = static_cast<double>(L);
    const double lambda = measure_.lambda();
    std::vector<lp::VarId> theta;
    for (std::size_t l = 0; l < L; ++l) {
      std::vector<lp::Term> child = node(t + 1, physics.state_out, l);
      const lp::VarId th = program_.add_variable(-lp::kInf, lp::kInf, 0.0);
      for (lp::Term& term : child) term.coef = -term.coef;
      child.push_back({th, 1.0});
      program_.add_row(std::move(child), lp::Sense::Equal, 0.0);
      theta.push_back(th);
      cost.push_back({th, (1.0 - lambda) / Ld});
    }
    if (lambda > 0.0) {
      const double tail = lambda / ((1.0 - measure_.alpha()) * Ld);
      const lp::VarId z = program_.add_variable(-lp::kInf, lp::kInf, 0.0);
      cost.push_back({z, lambda});
      for (std::size_t l = 0; l < L; ++l) {
        const lp::VarId delta = program_.add_variable(0.0, lp::kInf, 0.0);
        program_.add_row({{delta, 1.0}, {theta[l], -1.0}, {z, 1.0}}, lp::Sense::GreaterEqual, 0.0);
        cost.push_back({delta, tail});
      }
    }
    return cost;
  }

 private:
  const hydro::SystemCase& system_;
  const scenario::Lattice& lattice_;
  const risk::RiskMeasure& measure_;
  lp::LinearProgram& program_;
};

void check_inputs(const hydro::SystemCase& system, const scenario::Lattice& lattice,
                  std::size_t stage, std::size_t opening, std::size_t cap) {
  system.validate();
  system.validate_lattice(lattice);
  if (stage >= lattice.stages() || opening >= lattice.openings_at(stage)) {
    throw Error(ErrorCode::InvalidArgument, "tree node index out of range");
  }
  const std::size_t nodes = subtree_nodes(lattice, stage);
  if (nodes > cap) {
    throw Error(ErrorCode::TreeTooLarge, "tree has " + std::to_string(nodes) +
                                             " nodes, above the cap of " + std::to_string(cap));
  }
}

double solve_program(const lp::LinearProgram& program) {
  const lp::LPSolution sol = lp::solve(program);
  if (!sol.optimal()) {
    throw Error(ErrorCode::StageInfeasible,
                "deterministic equivalent is " + std::string(lp::to_string(sol.status)));
  }
  return sol.objective;
}

}  // namespace

lp::LinearProgram build_subtree_lp(const hydro::SystemCase& system, const scenario::Lattice& lattice,
                                   const risk::RiskMeasure& measure, std::size_t stage,
                                   const StateVector& state, std::size_t opening, std::size_t cap) {
  check_inputs(system, lattice, stage, opening, cap);
  system.validate_state(state);
  std::vector<LinearExpr> state_in;
  for (double v : state.flat()) state_in.push_back(LinearExpr{{}, v});
  lp::LinearProgram program;
  const std::vector<lp::Term> cost =
      TreeBuilder(system, lattice, measure, program).node(stage, state_in, opening);
  for (const lp::Term& t : cost) program.set_cost(t.var, program.cost(t.var) + t.coef);
  return program;
}

lp::LinearProgram build_tree_lp(const hydro::SystemCase& system, const scenario::Lattice& lattice,
                                const risk::RiskMeasure& measure, std::size_t cap) {
  return build_subtree_lp(system, lattice, measure, 0, system.initial_state(), 0, cap);
}

double solve_tree(const hydro::SystemCase& system, const scenario::Lattice& lattice,
                  const risk::RiskMeasure& measure, std::size_t cap) {
  return solve_program(build_tree_lp(system, lattice, measure, cap));
}

double exact_cost_to_go(const hydro::SystemCase& system, const scenario::Lattice& lattice,
                        const risk::RiskMeasure& measure, std::size_t stage, const StateVector& state,
                        std::size_t opening, std::size_t cap) {
  return solve_program(build_subtree_lp(system, lattice, measure, stage, state, opening, cap));
}

}  // namespace rasddp::detequiv

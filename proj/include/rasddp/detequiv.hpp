#pragma once

#include <cstddef>

#include "rasddp/hydrothermal.hpp"
#include "rasddp/lp.hpp"
#include "rasddp/risk.hpp"
#include "rasddp/scenario.hpp"
#include "rasddp/state.hpp"

namespace rasddp::detequiv {

inline constexpr std::size_t kDefaultNodeCap = 10000;

/// Monolithic LP over the expanded tree. Every internal node aggregates its
/// children with z, delta_l and theta_l (theta_l = child total cost); the
/// objective is the root's nested risk-adjusted cost.
lp::LinearProgram build_tree_lp(const hydro::SystemCase& system, const scenario::Lattice& lattice,
                                const risk::RiskMeasure& measure,
                                std::size_t cap = kDefaultNodeCap);

/// Subtree LP rooted at (stage, opening) with the incoming state fixed.
lp::LinearProgram build_subtree_lp(const hydro::SystemCase& system, const scenario::Lattice& lattice,
                                   const risk::RiskMeasure& measure, std::size_t stage,
                                   const StateVector& state, std::size_t opening,
                                   std::size_t cap = kDefaultNodeCap);

/// Optimal nested cost of the whole tree.
double solve_tree(const hydro::SystemCase& system, const scenario::Lattice& lattice,
                  const risk::RiskMeasure& measure, std::size_t cap = kDefaultNodeCap);

/// Exact Q_stage(state, noise(stage, opening)), stage 0-based.
double exact_cost_to_go(const hydro::SystemCase& system, const scenario::Lattice& lattice,
                        const risk::RiskMeasure& measure, std::size_t stage, const StateVector& state,
                        std::size_t opening, std::size_t cap = kDefaultNodeCap);

/// Nodes of the subtree rooted at `stage`: sum over later stages of L^(t - stage).
std::size_t subtree_nodes(const scenario::Lattice& lattice, std::size_t stage);

}  // namespace rasddp::detequiv

#include <cmath>
#include <random>

#include "doctest.h"
#include "rasddp/detequiv.hpp"
#include "rasddp/error.hpp"
#include "support/cases.hpp"
#include "support/scenario_lp.hpp"

using namespace rasddp;

namespace {

// Thermal-only two-stage case with a free first stage and stochastic demand.
test::Case demand_tree(std::vector<double> second_stage_demand) {
  test::Case c;
  c.system = test::thermal_system(0.0, {{1.0, 100.0}});
  std::vector<std::vector<scenario::NoiseRealization>> noises(2);
  noises[0].push_back(test::demand_noise({0.0}));
  for (double d : second_stage_demand) noises[1].push_back(test::demand_noise({d}));
  c.lattice = scenario::Lattice(second_stage_demand.size(), std::move(noises));
  return c;
}

test::Case small_case(std::uint64_t seed, std::size_t stages = 4, std::size_t openings = 2) {
  test::RandomCaseSpec spec;
  spec.stages = stages;
  spec.openings = openings;
  spec.max_ar_lag = seed % 3;
  spec.cascade = seed % 2 == 1;
  return test::random_case(spec, seed);
}

}  // namespace

TEST_CASE("detequiv: node counts") {
  CHECK(detequiv::subtree_nodes(small_case(1, 7, 2).lattice, 0) == 127);
  CHECK(detequiv::subtree_nodes(small_case(1, 4, 3).lattice, 1) == 13);
  CHECK(detequiv::subtree_nodes(small_case(1, 4, 3).lattice, 3) == 1);
}

TEST_CASE("detequiv: single stage equals the stage subproblem") {
  test::RandomCaseSpec spec;
  spec.stages = 1;
  const test::Case c = test::random_case(spec, 5);
  const CutPool pool(1, c.lattice.openings(), c.system.state_dimension());
  const double stage = hydro::solve_stage(c.system, 0, c.system.initial_state(), c.lattice.noise(0, 0),
                                          pool, risk::RiskMeasure(0.5, 0.5))
                           .objective;
  CHECK(detequiv::solve_tree(c.system, c.lattice, risk::RiskMeasure(0.5, 0.5)) == doctest::Approx(stage));
}

TEST_CASE("detequiv: worst child under full CVaR") {
  const test::Case c = demand_tree({1.0, 3.0});
  CHECK(detequiv::solve_tree(c.system, c.lattice, risk::RiskMeasure(1.0, 0.5)) == doctest::Approx(3.0));
  CHECK(detequiv::solve_tree(c.system, c.lattice, risk::RiskMeasure()) == doctest::Approx(2.0));
  CHECK(detequiv::solve_tree(c.system, c.lattice, risk::RiskMeasure(0.5, 0.5)) == doctest::Approx(2.5));
}

TEST_CASE("detequiv: CVaR tail over four children") {
  // alpha = 0.5 over {1, 2, 5, 8}: tail mean 6.5; rho at lambda 0.4 = 0.6 * 4 + 0.4 * 6.5.
  const test::Case c = demand_tree({2.0, 8.0, 1.0, 5.0});
  CHECK(detequiv::solve_tree(c.system, c.lattice, risk::RiskMeasure(0.4, 0.5)) ==
        doctest::Approx(0.6 * 4.0 + 0.4 * 6.5));
}

TEST_CASE("detequiv: risk-neutral tree matches the scenario formulation") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const std::size_t stages = 3 + seed % 2;
    const test::Case c = small_case(seed, stages, stages == 3 ? 3 : 2);
    const double tree = detequiv::solve_tree(c.system, c.lattice, risk::RiskMeasure());
    const double scen = test::scenario_decomposition_optimum(c.system, c.lattice);
    CHECK(std::abs(tree - scen) <= 1e-7 * std::max(1.0, std::abs(scen)));
  }
}

TEST_CASE("detequiv: self-consistency with the cost-to-go oracle") {
  const risk::RiskMeasure m(0.5, 0.5);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const test::Case c = small_case(seed);
    const double tree = detequiv::solve_tree(c.system, c.lattice, m);
    const double root = detequiv::exact_cost_to_go(c.system, c.lattice, m, 0, c.system.initial_state(), 0);
    CHECK(std::abs(tree - root) <= 1e-8 * std::max(1.0, std::abs(tree)));
  }
}

TEST_CASE("detequiv: last-stage cost-to-go is the stage subproblem") {
  const test::Case c = small_case(3);
  std::mt19937_64 rng(3);
  const CutPool pool(c.lattice.stages(), c.lattice.openings(), c.system.state_dimension());
  const std::size_t T = c.lattice.stages();
  for (int k = 0; k < 5; ++k) {
    const StateVector x = test::random_state(c.system, rng);
    for (std::size_t l = 0; l < c.lattice.openings(); ++l) {
      const double stage =
          hydro::solve_stage(c.system, T - 1, x, c.lattice.noise(T - 1, l), pool, risk::RiskMeasure()).objective;
      CHECK(detequiv::exact_cost_to_go(c.system, c.lattice, risk::RiskMeasure(0.3, 0.2), T - 1, x, l) ==
            doctest::Approx(stage).epsilon(1e-9));
    }
  }
}

TEST_CASE("detequiv: fuller reservoirs never cost more") {
  const risk::RiskMeasure m(0.5, 0.5);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const test::Case c = small_case(seed);
    StateVector empty = c.system.initial_state();
    StateVector full = empty;
    for (std::size_t j = 0; j < c.system.hydros.size(); ++j) {
      empty.storages[j] = 0.0;
      full.storages[j] = c.system.hydros[j].max_storage;
    }
    CHECK(detequiv::exact_cost_to_go(c.system, c.lattice, m, 1, full, 0) <=
          detequiv::exact_cost_to_go(c.system, c.lattice, m, 1, empty, 0) + 1e-9);
  }
}

TEST_CASE("detequiv: risk aversion never lowers the optimum") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const test::Case c = small_case(seed, 3, 3);
    for (double alpha : {0.0, 1.0 / 3.0, 0.5, 0.9}) {
      double previous = -lp::kInf;
      for (double lambda : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const double v = detequiv::solve_tree(c.system, c.lattice, risk::RiskMeasure(lambda, alpha));
        CHECK(v >= previous - 1e-9 * std::max(1.0, std::abs(v)));
        previous = v;
      }
    }
  }
}

TEST_CASE("detequiv: tree size cap") {
  const test::Case c = small_case(1, 7, 2);
  try {
    detequiv::build_tree_lp(c.system, c.lattice, risk::RiskMeasure(), 100);
    FAIL("expected TreeTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TreeTooLarge);
  }
}

// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "rasddp/case_io.hpp"
#include "rasddp/cli.hpp"
#include "rasddp/detequiv.hpp"
#include "rasddp/lp.hpp"
#include "rasddp/risk.hpp"
#include "rasddp/sddp.hpp"
#include "support/cases.hpp"
#include "support/lp_oracle.hpp"
#include "support/risk_oracle.hpp"

using namespace rasddp;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* pattern, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

test::Case full_tree_case() {
  test::RandomCaseSpec spec;
  spec.hydros = 2;
  spec.thermals = 3;
  spec.stages = 7;
  spec.openings = 2;
  spec.max_ar_lag = 1;
  spec.cascade = true;
  return test::random_case(spec, 6);
}

sddp::EngineConfig closure_config(const risk::RiskMeasure& m, scenario::SamplerMode sampler) {
  sddp::EngineConfig cfg;
  cfg.measure = m;
  cfg.sampler = sampler;
  cfg.max_iterations = 200;
  cfg.min_iterations = 40;
  cfg.batch_size = 4;
  cfg.seed = 2024;
  cfg.stop_gap_tol = 1e-7;
  return cfg;
}

Outcome full_tree_sanity() {
  Outcome o;
  const test::Case c = full_tree_case();
  const risk::RiskMeasure m(0.5, 0.5);
  const double exact = detequiv::solve_tree(c.system, c.lattice, m);
  const sddp::TrainedPolicy policy =
      sddp::train(c.system, c.lattice, closure_config(m, scenario::SamplerMode::RiskAdjusted));
  const double lb = policy.bounds.back().lower_bound;
  const double value = sddp::evaluate_policy_exact(c.system, c.lattice, policy.cuts, m);
  const auto paths = sddp::forward_pass(c.system, c.lattice, policy.cuts, m, false, 0, 400, 99);
  const sddp::UpperBound naive = sddp::upper_bound_estimate(paths);
  const double dispersion = naive.std_error * std::sqrt(static_cast<double>(naive.samples)) / naive.mean;

  const bool a = rel_err(lb, exact) <= 1e-5;
  const bool b = rel_err(value, exact) <= 1e-5;
  const bool dispersed = dispersion > 0.01;
  const bool cc = !dispersed || naive.mean < exact;
  o.pass = a && b && cc && dispersed;
  o.detail = "detequiv " + fmt("%.8f", exact) + ", LB " + fmt("%.8f", lb) + " (rel " +
             fmt("%.1e", rel_err(lb, exact)) + "), exact policy value " + fmt("%.8f", value) + " (rel " +
             fmt("%.1e", rel_err(value, exact)) + "), naive UB " + fmt("%.4f", naive.mean) + " over 400 paths" +
             " (dispersion " + fmt("%.1f%%", 100.0 * dispersion) + "), " +
             std::to_string(policy.bounds.size()) + " iterations";
  return o;
}

Outcome cvar_equivalence() {
  Outcome o;
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const test::RiskDraw d = test::random_risk_draw(rng, true);
    const risk::RiskMeasure m(d.lambda, d.alpha);
    const double lp_value = risk::rho_lp(d.values, m).value;
    const double oracle = test::rho_by_quantile_integral(d.values, d.lambda, d.alpha);
    worst = std::max(worst, std::abs(lp_value - oracle));
  }
  o.pass = worst <= 1e-8;
  o.detail = "10000 draws, max |rho_lp - oracle| = " + fmt("%.2e", worst);
  return o;
}

Outcome weight_properties() {
  Outcome o;
  std::mt19937_64 rng(2);
  double worst_sum = 0.0, worst_dot = 0.0, min_weight = 1.0;
  bool uniform_ok = true;
  for (int k = 0; k < 10000; ++k) {
    test::RiskDraw d = test::random_risk_draw(rng, k % 2 == 0);
    if (k % 10 == 0) d.lambda = 0.0;
    const risk::RiskMeasure m(d.lambda, d.alpha);
    const risk::WeightVector w = risk::sampling_weights(d.values, m);
    double sum = 0.0, dot = 0.0;
    for (std::size_t l = 0; l < w.size(); ++l) {
      sum += w[l];
      dot += w[l] * d.values[l];
      min_weight = std::min(min_weight, w[l]);
      if (d.lambda == 0.0 && w[l] != 1.0 / static_cast<double>(w.size())) uniform_ok = false;
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    worst_dot = std::max(worst_dot, std::abs(dot - test::rho_by_quantile_integral(d.values, d.lambda, d.alpha)));
  }
  o.pass = min_weight >= 0.0 && worst_sum <= 1e-12 && worst_dot <= 1e-9 && uniform_ok;
  o.detail = "10000 draws, min weight " + fmt("%.3g", min_weight) + ", max |sum-1| " + fmt("%.1e", worst_sum) +
             ", max |w.beta - rho| " + fmt("%.1e", worst_dot) +
             (uniform_ok ? ", lambda=0 exactly uniform" : ", lambda=0 NOT uniform");
  return o;
}

Outcome cut_validity() {
  Outcome o;
  double worst = -lp::kInf;
  std::size_t checks = 0;
  for (std::uint64_t seed : {11, 12, 13}) {
    test::RandomCaseSpec spec;
    spec.stages = 4;
    spec.openings = 2;
    spec.max_ar_lag = 1 + seed % 2;
    spec.cascade = seed % 2 == 1;
    const test::Case c = test::random_case(spec, seed);
    sddp::EngineConfig cfg;
    cfg.measure = risk::RiskMeasure(0.5, 0.5);
    cfg.max_iterations = cfg.min_iterations = 8;
    cfg.batch_size = 2;
    cfg.seed = seed;
    const sddp::TrainedPolicy policy = sddp::train(c.system, c.lattice, cfg);
    std::mt19937_64 rng(seed);
    for (int k = 0; k < 100; ++k) {
      const StateVector x = test::random_state(c.system, rng);
      const std::vector<double> flat = x.flat();
      for (std::size_t t = 0; t + 1 < c.lattice.stages(); ++t) {
        for (std::size_t l = 0; l < c.lattice.openings(); ++l) {
          const double exact = detequiv::exact_cost_to_go(c.system, c.lattice, cfg.measure, t + 1, x, l);
          for (const Cut& cut : policy.cuts.cuts(t, l)) {
            worst = std::max(worst, cut.value_at(flat) - exact);
            ++checks;
          }
        }
      }
    }
  }
  o.pass = worst <= 1e-6;
  o.detail = std::to_string(checks) + " cut/state pairs on 3 cases x 100 states, max violation " + fmt("%.2e", worst);
  return o;
}

Outcome lower_bound_monotone() {
  Outcome o;
  double worst_drop = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    test::RandomCaseSpec spec;
    spec.stages = 3 + seed % 3;
    spec.openings = 2 + seed % 2;
    spec.max_ar_lag = seed % 3;
    spec.cascade = seed % 2 == 0;
    spec.buses = 1 + seed % 2;
    const test::Case c = test::random_case(spec, 500 + seed);
    sddp::EngineConfig cfg;
    cfg.measure = risk::RiskMeasure(0.25 * static_cast<double>(seed % 5), seed % 2 == 0 ? 0.5 : 0.2);
    cfg.sampler = static_cast<scenario::SamplerMode>(seed % 3);
    cfg.max_iterations = cfg.min_iterations = 30;
    cfg.batch_size = 2;
    cfg.seed = seed;
    const sddp::TrainedPolicy policy = sddp::train(c.system, c.lattice, cfg);
    for (std::size_t k = 1; k < policy.bounds.size(); ++k) {
      worst_drop = std::max(worst_drop, policy.bounds[k - 1].lower_bound - policy.bounds[k].lower_bound);
    }
  }
  o.pass = worst_drop <= 1e-9;
  o.detail = "20 cases x 30 iterations, largest decrease " + fmt("%.2e", worst_drop);
  return o;
}

Outcome risk_neutral_regression() {
  Outcome o;
  const test::Case c = full_tree_case();
  const risk::RiskMeasure neutral;
  bool identical = true;
  CutPool pool = sddp::empty_pool(c.system, c.lattice);
  for (std::size_t k = 1; k <= 10; ++k) {
    const auto risk_paths = sddp::forward_pass(c.system, c.lattice, pool, neutral, true, k, 8, 7);
    const auto uniform_paths = sddp::forward_pass(c.system, c.lattice, pool, neutral, false, k, 8, 7);
    identical = identical && risk_paths == uniform_paths;
    sddp::backward_pass(c.system, c.lattice, pool, risk_paths, neutral);
  }
  const auto risk_policy =
      sddp::train(c.system, c.lattice, closure_config(neutral, scenario::SamplerMode::RiskAdjusted));
  const auto uniform_policy =
      sddp::train(c.system, c.lattice, closure_config(neutral, scenario::SamplerMode::Uniform));
  identical = identical && risk_policy.cuts == uniform_policy.cuts;
  const double exact = detequiv::solve_tree(c.system, c.lattice, neutral);
  const double lb = risk_policy.bounds.back().lower_bound;
  o.pass = identical && rel_err(lb, exact) <= 1e-5;
  o.detail = std::string(identical ? "path records identical" : "path records DIFFER") + ", LB " +
             fmt("%.8f", lb) + " vs detequiv " + fmt("%.8f", exact) + " (rel " + fmt("%.1e", rel_err(lb, exact)) + ")";
  return o;
}

Outcome lp_soundness() {
  Outcome o;
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> size(1, 12);
  double worst_primal = 0.0, worst_sign = 0.0, worst_gap = 0.0;
  int failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const lp::LinearProgram p = test::random_feasible_program(rng, size(rng), size(rng));
    const lp::LPSolution s = lp::solve(p);
    if (s.status != lp::Status::Optimal) {
      ++failures;
      continue;
    }
    const test::DualCheck dual = test::check_dual(p, s);
    worst_primal = std::max(worst_primal, test::max_violation(p, s.primal));
    worst_sign = std::max(worst_sign, dual.max_sign_violation);
    worst_gap = std::max(worst_gap, std::abs(dual.dual_objective - s.objective));
  }
  std::mt19937_64 rng2(99);
  std::uniform_int_distribution<int> small(1, 4);
  double worst_vertex = 0.0;
  for (int trial = 0; trial < 600; ++trial) {
    const lp::LinearProgram p = test::random_box_program(rng2, small(rng2), small(rng2));
    const std::optional<double> oracle = test::enumerate_vertices(p);
    const lp::LPSolution s = lp::solve(p);
    if (!oracle) {
      failures += s.status != lp::Status::Infeasible;
      continue;
    }
    if (s.status != lp::Status::Optimal) {
      ++failures;
      continue;
    }
    worst_vertex = std::max(worst_vertex, std::abs(s.objective - *oracle));
  }
  o.pass = failures == 0 && worst_primal <= 1e-7 && worst_sign <= 1e-7 && worst_gap <= 1e-7 && worst_vertex <= 1e-7;
  o.detail = "1000 duality programs (primal viol " + fmt("%.1e", worst_primal) + ", dual sign viol " +
             fmt("%.1e", worst_sign) + ", gap " + fmt("%.1e", worst_gap) + "), 600 vertex programs (max diff " +
             fmt("%.1e", worst_vertex) + "), status mismatches " + std::to_string(failures);
  return o;
}

std::string run_solve(const std::filesystem::path& case_path, const std::filesystem::path& out) {
  const std::vector<std::string> args = {"rasddp",  "solve",    case_path.string(), "--iters", "25",
                                         "--paths", "4",        "--seed",           "17",      "--sampling",
                                         "alternating", "--out", out.string()};
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream sink_out, sink_err;
  if (cli::run_cli(static_cast<int>(argv.size()), argv.data(), sink_out, sink_err) != 0) {
    return "solve failed: " + sink_err.str();
  }
  std::istringstream csv(io::read_file(out / "convergence.csv"));
  std::string stripped;
  for (std::string line; std::getline(csv, line);) stripped += line.substr(0, line.rfind(',')) + "\n";
  return stripped;
}

Outcome cli_determinism() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "rasddp_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path case_path = fs::path(RASDDP_SOURCE_DIR) / "cases" / "hydro_t7.json";
  const std::string first = run_solve(case_path, dir / "a");
  const std::string second = run_solve(case_path, dir / "b");
  const auto rows = std::count(first.begin(), first.end(), '\n') - 1;
  o.pass = first == second && first.rfind("iteration,", 0) == 0;
  o.detail = std::string(first == second ? "identical" : "DIFFERENT") + " convergence CSVs over " +
             std::to_string(rows) + " iterations (wall_ms excluded)";
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> check;
    double limit_s;  // 0 means no runtime bound
  };
  const std::vector<Criterion> criteria = {
      {1, "full-tree sanity", full_tree_sanity, 60.0},
      {2, "CVaR equivalence", cvar_equivalence, 30.0},
      {3, "weight distribution properties", weight_properties, 10.0},
      {4, "cut validity", cut_validity, 120.0},
      {5, "lower-bound monotonicity", lower_bound_monotone, 0.0},
      {6, "risk-neutral regression", risk_neutral_regression, 0.0},
      {7, "LP solver soundness", lp_soundness, 0.0},
      {8, "CLI determinism", cli_determinism, 0.0},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_s > 0.0 && seconds > c.limit_s) o.pass = false;
    std::string timing = fmt("%.2f s", seconds);
    if (c.limit_s > 0.0) timing += fmt(" of %.0f s", c.limit_s);
    std::printf("[%s] criterion %d %s: %s; %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

#include "rasddp/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "rasddp/case_io.hpp"
#include "rasddp/detequiv.hpp"
#include "rasddp/error.hpp"
#include "rasddp/sddp.hpp"

namespace rasddp::cli {

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kNumerical = 3;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::NumericalFailure:
    case ErrorCode::NotOptimal:
    case ErrorCode::NegativeWeight:
    case ErrorCode::StageInfeasible:
      return kNumerical;
    default:
      return kData;
  }
}

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

struct RiskOverride {
  std::optional<double> lambda;
  std::optional<double> alpha;

  risk::RiskMeasure apply(const risk::RiskMeasure& base) const {
    return risk::RiskMeasure(lambda.value_or(base.lambda()), alpha.value_or(base.alpha()));
  }
};

void add_risk_options(CLI::App& cmd, RiskOverride& r) {
  cmd.add_option("--lambda", r.lambda, "Weight of CVaR in the composite risk measure");
  cmd.add_option("--alpha", r.alpha, "CVaR quantile level");
}

struct SolveArgs {
  std::string case_path;
  std::optional<std::size_t> iters, min_iters, paths, threads;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> sampling;
  std::optional<double> tol;
  RiskOverride risk;
  std::string out_dir = "run";
};

int do_solve(const SolveArgs& a, std::ostream& out) {
  const io::CaseFile c = io::parse_case(a.case_path);
  sddp::EngineConfig cfg = c.defaults;
  if (a.iters) cfg.max_iterations = *a.iters;
  if (a.min_iters) cfg.min_iterations = *a.min_iters;
  if (a.iters && !a.min_iters) cfg.min_iterations = std::min(cfg.min_iterations, cfg.max_iterations);
  if (a.paths) cfg.batch_size = *a.paths;
  if (a.threads) cfg.threads = *a.threads;
  if (a.seed) cfg.seed = *a.seed;
  if (a.sampling) cfg.sampler = scenario::parse_sampler_mode(*a.sampling);
  if (a.tol) cfg.stop_gap_tol = *a.tol;
  cfg.measure = a.risk.apply(cfg.measure);

  const sddp::TrainedPolicy policy = sddp::train(c.system, c.lattice, cfg);
  const sddp::BoundsEntry& last = policy.bounds.back();
  nlohmann::json summary{{"iterations", policy.bounds.size()},
                         {"lower_bound", last.lower_bound},
                         {"fingerprint", policy.fingerprint},
                         {"cuts", policy.cuts.size()},
                         {"lambda", cfg.measure.lambda()},
                         {"alpha", cfg.measure.alpha()},
                         {"sampler", std::string(scenario::to_string(cfg.sampler))},
                         {"seed", cfg.seed}};
  for (auto it = policy.bounds.rbegin(); it != policy.bounds.rend(); ++it) {
    if (!it->upper) continue;
    summary["ub_iteration"] = it->iteration;
    summary["ub_mean"] = it->upper->mean;
    summary["ub_stderr"] = it->upper->std_error;
    summary["ub_samples"] = it->upper->samples;
    break;
  }

  const std::filesystem::path dir(a.out_dir);
  std::filesystem::create_directories(dir);
  const std::string csv = io::bounds_csv(policy.bounds);
  const std::string policy_text = io::serialize_policy(policy);
  io::write_file_atomic(dir / "convergence.csv", csv);
  io::write_file_atomic(dir / "bounds.json", summary.dump(2) + "\n");
  io::write_file_atomic(dir / "policy.json", policy_text);

  out << "iterations " << policy.bounds.size() << "\n";
  out << "lower_bound " << io::format_double(last.lower_bound) << "\n";
  if (summary.contains("ub_mean")) {
    out << "ub_mean " << io::format_double(summary["ub_mean"].get<double>()) << "\n";
    out << "ub_stderr " << io::format_double(summary["ub_stderr"].get<double>()) << "\n";
  }
  out << "output " << dir.string() << "\n";
  return 0;
}

sddp::TrainedPolicy load_policy(const io::CaseFile& c, const std::string& path) {
  return io::read_policy(path, io::fingerprint(c.system, c.lattice));
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Risk-adjusted multicut SDDP for hydrothermal scheduling", "rasddp"};
  app.require_subcommand(1);

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Train a policy and write convergence outputs");
  solve_cmd->add_option("case", solve.case_path, "Case file")->required();
  solve_cmd->add_option("--iters", solve.iters, "Maximum iterations");
  solve_cmd->add_option("--min-iters", solve.min_iters, "Minimum iterations before stopping");
  solve_cmd->add_option("--paths", solve.paths, "Forward paths per iteration");
  solve_cmd->add_option("--seed", solve.seed, "Random seed");
  solve_cmd->add_option("--sampling", solve.sampling, "uniform, risk or alternating")
      ->check(CLI::IsMember({"uniform", "risk", "alternating"}));
  solve_cmd->add_option("--threads", solve.threads, "Worker threads");
  solve_cmd->add_option("--tol", solve.tol, "Relative stopping tolerance");
  add_risk_options(*solve_cmd, solve.risk);
  solve_cmd->add_option("--out", solve.out_dir, "Output directory")->capture_default_str();

  std::string de_case;
  RiskOverride de_risk;
  int digits = 4;
  CLI::App* de_cmd = app.add_subcommand("detequiv", "Print the exact optimum of the full scenario tree");
  de_cmd->add_option("case", de_case, "Case file")->required();
  add_risk_options(*de_cmd, de_risk);
  de_cmd->add_option("--digits", digits, "Decimals printed")->check(CLI::Range(0, 17));

  std::string ev_case, ev_policy;
  CLI::App* ev_cmd = app.add_subcommand("evaluate", "Exact value of a trained policy over the full tree");
  ev_cmd->add_option("case", ev_case, "Case file")->required();
  ev_cmd->add_option("--policy", ev_policy, "Policy file")->required();
  ev_cmd->add_option("--digits", digits, "Decimals printed")->check(CLI::Range(0, 17));

  std::string sim_case, sim_policy, sim_sampling = "risk";
  std::size_t sim_paths = 100;
  std::uint64_t sim_seed = 0;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo simulation of a trained policy");
  sim_cmd->add_option("case", sim_case, "Case file")->required();
  sim_cmd->add_option("--policy", sim_policy, "Policy file")->required();
  sim_cmd->add_option("--paths", sim_paths, "Number of paths")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim_seed, "Random seed");
  sim_cmd->add_option("--sampling", sim_sampling, "uniform or risk")->check(CLI::IsMember({"uniform", "risk"}));
  sim_cmd->add_option("--digits", digits, "Decimals printed")->check(CLI::Range(0, 17));

  std::string plot_dir, plot_out;
  CLI::App* plot_cmd = app.add_subcommand("plot", "Write an SVG convergence chart for a run directory");
  plot_cmd->add_option("rundir", plot_dir, "Directory written by solve")->required();
  plot_cmd->add_option("--out", plot_out, "SVG path (default RUNDIR/convergence.svg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*solve_cmd) return do_solve(solve, out);
    if (*de_cmd) {
      const io::CaseFile c = io::parse_case(de_case);
      out << fixed(detequiv::solve_tree(c.system, c.lattice, de_risk.apply(c.defaults.measure)), digits) << "\n";
      return 0;
    }
    if (*ev_cmd) {
      const io::CaseFile c = io::parse_case(ev_case);
      const sddp::TrainedPolicy p = load_policy(c, ev_policy);
      out << fixed(sddp::evaluate_policy_exact(c.system, c.lattice, p.cuts, p.config.measure), digits) << "\n";
      return 0;
    }
    if (*sim_cmd) {
      const io::CaseFile c = io::parse_case(sim_case);
      const sddp::TrainedPolicy p = load_policy(c, sim_policy);
      // Iteration index 0 is never used by training, so the streams are fresh.
      const auto paths = sddp::forward_pass(c.system, c.lattice, p.cuts, p.config.measure,
                                            sim_sampling == "risk", 0, sim_paths, sim_seed,
                                            p.config.threads);
      const sddp::UpperBound ub = sddp::upper_bound_estimate(paths);
      out << "mean " << fixed(ub.mean, digits) << "\n";
      out << "stderr " << fixed(ub.std_error, digits) << "\n";
      out << "samples " << ub.samples << "\n";
      return 0;
    }
    if (*plot_cmd) {
      const std::filesystem::path dir(plot_dir);
      const sddp::BoundsLog log = io::parse_bounds_csv(io::read_file(dir / "convergence.csv"));
      const std::filesystem::path target = plot_out.empty() ? dir / "convergence.svg" : std::filesystem::path(plot_out);
      io::write_file_atomic(target, io::convergence_svg(log));
      out << "wrote " << target.string() << "\n";
      return 0;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}

}  // namespace rasddp::cli

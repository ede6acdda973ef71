#include <cstring>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "rasddp/case_io.hpp"
#include "rasddp/cli.hpp"
#include "rasddp/error.hpp"
#include "support/cases.hpp"

using namespace rasddp;
namespace fs = std::filesystem;

namespace {

const std::string kMinimal = R"({
  "schema_version": 1,
  "system": {"buses": [{"name": "main", "demand": [10.0]}],
             "thermals": [{"name": "coal", "bus": "main", "cost": 2.0, "capacity": 15.0}]},
  "lattice": {"stages": 1, "openings": 1, "noises": [[{}]]}
})";

ErrorCode code_of(const std::string& text) {
  try {
    io::parse_case_text(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a parse error");
  return ErrorCode::IoError;
}

std::string edit(const std::string& text, const std::string& from, const std::string& to) {
  std::string out = text;
  const auto pos = out.find(from);
  REQUIRE(pos != std::string::npos);
  out.replace(pos, from.size(), to);
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rasddp_io_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(std::vector<std::string> args) {
  args.insert(args.begin(), "rasddp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

io::CaseFile random_file(std::uint64_t seed) {
  test::RandomCaseSpec spec;
  spec.buses = 2;
  spec.renewables = 1;
  spec.max_ar_lag = 2;
  spec.cascade = true;
  const test::Case c = test::random_case(spec, seed);
  io::CaseFile f{c.system, c.lattice, {}};
  f.defaults.measure = risk::RiskMeasure(0.25, 0.75);
  f.defaults.seed = 1234567890123ull;
  f.system.deficit_cost = 77.5;
  return f;
}

}  // namespace

TEST_CASE("io: minimal case parses with stable fingerprint") {
  const io::CaseFile c = io::parse_case_text(kMinimal);
  CHECK(c.system.thermals.size() == 1);
  CHECK(c.lattice.stages() == 1);
  std::string spaced = kMinimal;
  for (std::size_t pos = 0; (pos = spaced.find(',', pos)) != std::string::npos; pos += 3) spaced.insert(pos + 1, "\n ");
  const io::CaseFile d = io::parse_case_text(spaced);
  CHECK(io::fingerprint(c.system, c.lattice) == io::fingerprint(d.system, d.lattice));
  CHECK(io::fingerprint(c.system, c.lattice).size() == 16);
}

TEST_CASE("io: unknown keys are rejected by name") {
  try {
    io::parse_case_text(edit(kMinimal, "\"schema_version\": 1,", "\"schema_version\": 1, \"foo\": 2,"));
    FAIL("expected SchemaError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaError);
    CHECK(std::string(e.what()).find("foo") != std::string::npos);
  }
  try {
    io::parse_case_text(edit(kMinimal, "\"cost\": 2.0", "\"cost\": 2.0, \"colour\": 1"));
    FAIL("expected SchemaError");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("colour") != std::string::npos);
    CHECK(std::string(e.what()).find("system.thermals[0]") != std::string::npos);
  }
}

TEST_CASE("io: structural errors") {
  CHECK(code_of(edit(kMinimal, "\"bus\": \"main\"", "\"bus\": \"nowhere\"")) == ErrorCode::DanglingReference);
  CHECK(code_of(edit(kMinimal, "\"cost\": 2.0", "\"cost\": \"two\"")) == ErrorCode::SchemaError);
  CHECK(code_of(edit(kMinimal, "\"schema_version\": 1", "\"schema_version\": 9")) == ErrorCode::SchemaError);
  CHECK(code_of(edit(kMinimal, "\"stages\": 1", "\"stages\": 2")) == ErrorCode::SchemaError);
  CHECK(code_of("{ not json") == ErrorCode::SchemaError);
  const std::string self_cascade = edit(
      kMinimal, "\"thermals\"",
      R"("hydros": [{"name": "h", "bus": "main", "max_storage": 5, "max_turbine": 2, "production": 1,
                     "initial_storage": 1, "upstream": ["h"]}], "thermals")");
  CHECK(code_of(edit(self_cascade, "[[{}]]", "[[{\"inflow\": [1.0]}]]")) == ErrorCode::CyclicCascade);
}

TEST_CASE("io: case serialization round trips") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const io::CaseFile f = random_file(seed);
    const io::CaseFile g = io::parse_case_text(io::serialize_case(f));
    CHECK(g == f);
    CHECK(io::fingerprint(g.system, g.lattice) == io::fingerprint(f.system, f.lattice));
  }
  io::CaseFile mutated = random_file(0);
  mutated.system.thermals[0].cost += 1e-9;
  CHECK(io::fingerprint(mutated.system, mutated.lattice) !=
        io::fingerprint(random_file(0).system, random_file(0).lattice));
}

TEST_CASE("io: policy round trip is bit exact") {
  const io::CaseFile f = random_file(3);
  sddp::EngineConfig cfg;
  cfg.measure = risk::RiskMeasure(0.5, 0.5);
  cfg.max_iterations = cfg.min_iterations = 3;
  cfg.batch_size = 2;
  const sddp::TrainedPolicy p = sddp::train(f.system, f.lattice, cfg);
  REQUIRE(p.cuts.size() > 0);
  const fs::path dir = scratch("policy");
  io::write_policy(p, dir / "policy.json");
  const sddp::TrainedPolicy q = io::read_policy(dir / "policy.json", p.fingerprint);
  CHECK(q == p);
  for (std::size_t t = 0; t + 1 < p.cuts.stages(); ++t) {
    for (std::size_t l = 0; l < p.cuts.openings(); ++l) {
      const auto a = p.cuts.cuts(t, l);
      const auto b = q.cuts.cuts(t, l);
      REQUIRE(a.size() == b.size());
      for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(std::memcmp(&a[k].intercept, &b[k].intercept, sizeof(double)) == 0);
        for (std::size_t d = 0; d < a[k].gradient.size(); ++d) {
          CHECK(std::memcmp(&a[k].gradient[d], &b[k].gradient[d], sizeof(double)) == 0);
        }
      }
    }
  }

  io::CaseFile mutated = f;
  mutated.system.buses[0].demand[0] += 1.0;
  try {
    io::read_policy(dir / "policy.json", io::fingerprint(mutated.system, mutated.lattice));
    FAIL("expected FingerprintMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::FingerprintMismatch);
  }

  const std::string text = io::read_file(dir / "policy.json");
  for (std::size_t cut : {text.size() / 2, text.size() - 3, std::size_t{10}}) {
    try {
      io::parse_policy(text.substr(0, cut), p.fingerprint);
      FAIL("expected CorruptFile");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::CorruptFile);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("io: convergence CSV contract") {
  sddp::BoundsLog log;
  log.push_back({1, 0.1, sddp::UpperBound{5.5, 0.25, 4}, scenario::SamplerMode::RiskAdjusted, 1.5});
  log.push_back({2, 1.0 / 3.0, std::nullopt, scenario::SamplerMode::Uniform, 2.25});
  const std::string csv = io::bounds_csv(log);
  CHECK(csv ==
        "iteration,lower_bound,ub_mean,ub_stderr,ub_samples,sampler,wall_ms\n"
        "1,0.1,5.5,0.25,4,risk,1.500\n"
        "2,0.3333333333333333,,,,uniform,2.250\n");
  CHECK(io::parse_bounds_csv(csv) == log);
  CHECK_THROWS_AS(io::parse_bounds_csv("iteration\n"), Error);
  const std::string svg = io::convergence_svg(log);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("circle") != std::string::npos);
}

TEST_CASE("io: format_double is shortest round trip") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5}) {
    CHECK(std::stod(io::format_double(v)) == v);
  }
  CHECK(io::format_double(10.0) == "10");
}

TEST_CASE("cli: usage and data errors") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"detequiv", "/nonexistent/case.json"}).code == 2);
  const fs::path dir = scratch("cli_errors");
  io::write_file_atomic(dir / "bad.json", edit(kMinimal, "\"schema_version\": 1,", "\"schema_version\": 1, \"foo\": 2,"));
  const CliResult r = run({"detequiv", (dir / "bad.json").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("foo") != std::string::npos);
  CHECK(run({"solve", (dir / "bad.json").string(), "--out", (dir / "out").string()}).code == 2);
  CHECK_FALSE(fs::exists(dir / "out" / "convergence.csv"));
  fs::remove_all(dir);
}

TEST_CASE("cli: solve, evaluate, simulate and plot on a small case") {
  const fs::path dir = scratch("cli_run");
  test::RandomCaseSpec spec;
  spec.stages = 4;
  const test::Case c = test::random_case(spec, 2);
  io::CaseFile f{c.system, c.lattice, {}};
  io::write_file_atomic(dir / "case.json", io::serialize_case(f));
  const std::string case_path = (dir / "case.json").string();
  const std::string out = (dir / "run").string();

  const CliResult solve = run({"solve", case_path, "--iters", "30", "--min-iters", "30", "--paths", "2",
                               "--lambda", "0.5", "--alpha", "0.5", "--sampling", "risk", "--out", out});
  REQUIRE(solve.code == 0);
  for (const char* name : {"convergence.csv", "bounds.json", "policy.json"}) CHECK(fs::exists(dir / "run" / name));
  const sddp::BoundsLog log = io::parse_bounds_csv(io::read_file(dir / "run" / "convergence.csv"));
  CHECK(log.size() == 30);
  for (std::size_t k = 1; k < log.size(); ++k) CHECK(log[k].lower_bound >= log[k - 1].lower_bound - 1e-9);

  const CliResult exact = run({"detequiv", case_path, "--lambda", "0.5", "--alpha", "0.5", "--digits", "10"});
  const CliResult value =
      run({"evaluate", case_path, "--policy", out + "/policy.json", "--digits", "10"});
  REQUIRE(exact.code == 0);
  REQUIRE(value.code == 0);
  const double e = std::stod(exact.out);
  CHECK(std::abs(std::stod(value.out) - e) <= 1e-5 * std::max(1.0, std::abs(e)));

  const CliResult sim = run({"simulate", case_path, "--policy", out + "/policy.json", "--paths", "50"});
  CHECK(sim.code == 0);
  CHECK(sim.out.find("samples 50") != std::string::npos);

  CHECK(run({"plot", out}).code == 0);
  CHECK(fs::exists(dir / "run" / "convergence.svg"));

  io::CaseFile mutated = f;
  mutated.system.thermals[0].capacity += 1.0;
  io::write_file_atomic(dir / "mutated.json", io::serialize_case(mutated));
  CHECK(run({"evaluate", (dir / "mutated.json").string(), "--policy", out + "/policy.json"}).code == 2);
  fs::remove_all(dir);
}

TEST_CASE("cli: solve is deterministic") {
  const fs::path dir = scratch("cli_det");
  test::RandomCaseSpec spec;
  spec.stages = 4;
  spec.openings = 3;
  const test::Case c = test::random_case(spec, 4);
  io::write_file_atomic(dir / "case.json", io::serialize_case(io::CaseFile{c.system, c.lattice, {}}));
  auto strip_wall = [](const std::string& csv) {
    std::string out;
    std::istringstream in(csv);
    for (std::string line; std::getline(in, line);) out += line.substr(0, line.rfind(',')) + "\n";
    return out;
  };
  std::string first;
  for (const char* name : {"a", "b"}) {
    const CliResult r = run({"solve", (dir / "case.json").string(), "--iters", "8", "--paths", "3", "--seed", "5",
                             "--lambda", "0.5", "--alpha", "0.5", "--sampling", "alternating", "--out",
                             (dir / name).string()});
    REQUIRE(r.code == 0);
    const std::string csv = strip_wall(io::read_file(dir / name / "convergence.csv"));
    if (first.empty()) first = csv;
    else CHECK(csv == first);
  }
  fs::remove_all(dir);
}

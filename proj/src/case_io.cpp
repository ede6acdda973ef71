#include "rasddp/case_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "rasddp/error.hpp"

namespace rasddp::io {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& message) {
  throw Error(ErrorCode::SchemaError, message);
}

std::string child(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string item(const std::string& path, std::size_t index) {
  return path + "[" + std::to_string(index) + "]";
}

const json& object(const json& j, const std::string& path, std::initializer_list<const char*> allowed,
                   std::initializer_list<const char*> required = {}) {
  if (!j.is_object()) schema_error((path.empty() ? std::string("document") : path) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) schema_error("unknown key '" + key + "' at " + (path.empty() ? "top level" : path));
  }
  for (const char* r : required) {
    if (!j.contains(r)) schema_error("missing required field " + child(path, r));
  }
  return j;
}

const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path + " must be an array");
  return j;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path + " must be a number");
  return j.get<double>();
}

std::uint64_t count(const json& j, const std::string& path) {
  if (!j.is_number_unsigned()) {
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return j.get<std::uint64_t>();
    schema_error(path + " must be a nonnegative integer");
  }
  return j.get<std::uint64_t>();
}

std::string text(const json& j, const std::string& path) {
  if (!j.is_string()) schema_error(path + " must be a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
  std::vector<double> out;
  for (std::size_t i = 0; i < array(j, path).size(); ++i) out.push_back(number(j[i], item(path, i)));
  return out;
}

template <class T>
std::map<std::string, std::size_t> name_index(const std::vector<T>& items, const std::string& what) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].name.empty()) schema_error(what + " names must be nonempty");
    if (!index.emplace(items[i].name, i).second) {
      schema_error("duplicate " + what + " name '" + items[i].name + "'");
    }
  }
  return index;
}

std::size_t resolve(const std::map<std::string, std::size_t>& index, const json& j,
                    const std::string& path, const std::string& what) {
  const std::string name = text(j, path);
  const auto it = index.find(name);
  if (it == index.end()) {
    throw Error(ErrorCode::DanglingReference, path + " refers to unknown " + what + " '" + name + "'");
  }
  return it->second;
}

hydro::SystemCase parse_system(const json& j) {
  const std::string p = "system";
  object(j, p, {"buses", "lines", "thermals", "hydros", "renewables", "deficit_cost", "beta_lower_bound"},
         {"buses"});
  hydro::SystemCase s;
  const json empty = json::array();
  const json& buses = array(j.at("buses"), child(p, "buses"));
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const std::string bp = item(child(p, "buses"), i);
    object(buses[i], bp, {"name", "demand"}, {"name", "demand"});
    hydro::Bus b;
    b.name = text(buses[i].at("name"), child(bp, "name"));
    const json& d = buses[i].at("demand");
    b.demand = d.is_number() ? std::vector<double>{d.get<double>()} : numbers(d, child(bp, "demand"));
    s.buses.push_back(std::move(b));
  }
  const auto bus_index = name_index(s.buses, "bus");

  const json lines = array(j.value("lines", empty), child(p, "lines"));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string lp_ = item(child(p, "lines"), i);
    object(lines[i], lp_, {"from", "to", "capacity"}, {"from", "to", "capacity"});
    s.lines.push_back({resolve(bus_index, lines[i].at("from"), child(lp_, "from"), "bus"),
                       resolve(bus_index, lines[i].at("to"), child(lp_, "to"), "bus"),
                       number(lines[i].at("capacity"), child(lp_, "capacity"))});
  }

  const json thermals = array(j.value("thermals", empty), child(p, "thermals"));
  for (std::size_t i = 0; i < thermals.size(); ++i) {
    const std::string tp = item(child(p, "thermals"), i);
    object(thermals[i], tp, {"name", "bus", "cost", "capacity"}, {"name", "bus", "cost", "capacity"});
    s.thermals.push_back({text(thermals[i].at("name"), child(tp, "name")),
                          resolve(bus_index, thermals[i].at("bus"), child(tp, "bus"), "bus"),
                          number(thermals[i].at("cost"), child(tp, "cost")),
                          number(thermals[i].at("capacity"), child(tp, "capacity"))});
  }
  name_index(s.thermals, "thermal");

  const json hydros = array(j.value("hydros", empty), child(p, "hydros"));
  for (std::size_t i = 0; i < hydros.size(); ++i) {
    const std::string hp = item(child(p, "hydros"), i);
    object(hydros[i], hp,
           {"name", "bus", "max_storage", "max_turbine", "production", "upstream", "ar_coefficients",
            "initial_storage", "initial_inflows"},
           {"name", "bus", "max_storage", "max_turbine", "production", "initial_storage"});
    hydro::HydroPlant h;
    h.name = text(hydros[i].at("name"), child(hp, "name"));
    h.bus = resolve(bus_index, hydros[i].at("bus"), child(hp, "bus"), "bus");
    h.max_storage = number(hydros[i].at("max_storage"), child(hp, "max_storage"));
    h.max_turbine = number(hydros[i].at("max_turbine"), child(hp, "max_turbine"));
    h.production = number(hydros[i].at("production"), child(hp, "production"));
    h.ar_coefficients = numbers(hydros[i].value("ar_coefficients", empty), child(hp, "ar_coefficients"));
    h.initial_storage = number(hydros[i].at("initial_storage"), child(hp, "initial_storage"));
    h.initial_inflows = numbers(hydros[i].value("initial_inflows", empty), child(hp, "initial_inflows"));
    s.hydros.push_back(std::move(h));
  }
  const auto hydro_index = name_index(s.hydros, "hydro");
  for (std::size_t i = 0; i < hydros.size(); ++i) {
    const std::string up = child(item(child(p, "hydros"), i), "upstream");
    const json list = array(hydros[i].value("upstream", empty), up);
    for (std::size_t k = 0; k < list.size(); ++k) {
      s.hydros[i].upstream.push_back(resolve(hydro_index, list[k], item(up, k), "hydro"));
    }
  }

  const json renewables = array(j.value("renewables", empty), child(p, "renewables"));
  for (std::size_t i = 0; i < renewables.size(); ++i) {
    const std::string rp = item(child(p, "renewables"), i);
    object(renewables[i], rp, {"name", "bus"}, {"name", "bus"});
    s.renewables.push_back({text(renewables[i].at("name"), child(rp, "name")),
                            resolve(bus_index, renewables[i].at("bus"), child(rp, "bus"), "bus")});
  }
  name_index(s.renewables, "renewable");

  if (j.contains("deficit_cost")) s.deficit_cost = number(j.at("deficit_cost"), child(p, "deficit_cost"));
  if (j.contains("beta_lower_bound")) {
    s.beta_lower_bound = number(j.at("beta_lower_bound"), child(p, "beta_lower_bound"));
  }
  s.validate();
  return s;
}

scenario::Lattice parse_lattice(const json& j) {
  const std::string p = "lattice";
  object(j, p, {"stages", "openings", "noises"}, {"stages", "openings", "noises"});
  const std::uint64_t stages = count(j.at("stages"), child(p, "stages"));
  const std::uint64_t openings = count(j.at("openings"), child(p, "openings"));
  const json& noises = array(j.at("noises"), child(p, "noises"));
  if (noises.size() != stages) {
    schema_error(child(p, "noises") + " has " + std::to_string(noises.size()) + " stages, expected " +
                 std::to_string(stages));
  }
  const json empty = json::array();
  std::vector<std::vector<scenario::NoiseRealization>> out(stages);
  for (std::size_t t = 0; t < noises.size(); ++t) {
    const std::string sp = item(child(p, "noises"), t);
    const json& stage = array(noises[t], sp);
    for (std::size_t l = 0; l < stage.size(); ++l) {
      const std::string np = item(sp, l);
      object(stage[l], np, {"inflow", "renewable_cap", "demand"});
      scenario::NoiseRealization n;
      n.inflow = numbers(stage[l].value("inflow", empty), child(np, "inflow"));
      n.renewable_cap = numbers(stage[l].value("renewable_cap", empty), child(np, "renewable_cap"));
      if (stage[l].contains("demand")) n.demand = numbers(stage[l].at("demand"), child(np, "demand"));
      out[t].push_back(std::move(n));
    }
  }
  try {
    return scenario::Lattice(openings, std::move(out));
  } catch (const Error& e) {
    schema_error(p + ": " + e.what());
  }
}

sddp::EngineConfig parse_config(const json& j, const std::string& p) {
  object(j, p,
         {"lambda", "alpha", "max_iterations", "min_iterations", "batch_size", "seed", "sampler",
          "stop_gap_tol", "ub_confidence", "threads"});
  sddp::EngineConfig c;
  const double lambda = j.contains("lambda") ? number(j.at("lambda"), child(p, "lambda")) : 0.0;
  const double alpha = j.contains("alpha") ? number(j.at("alpha"), child(p, "alpha")) : 0.0;
  try {
    c.measure = risk::RiskMeasure(lambda, alpha);
    if (j.contains("sampler")) c.sampler = scenario::parse_sampler_mode(text(j.at("sampler"), child(p, "sampler")));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) throw;
    schema_error(p + ": " + e.what());
  }
  if (j.contains("max_iterations")) c.max_iterations = count(j.at("max_iterations"), child(p, "max_iterations"));
  if (j.contains("min_iterations")) c.min_iterations = count(j.at("min_iterations"), child(p, "min_iterations"));
  if (j.contains("batch_size")) c.batch_size = count(j.at("batch_size"), child(p, "batch_size"));
  if (j.contains("seed")) c.seed = count(j.at("seed"), child(p, "seed"));
  if (j.contains("stop_gap_tol")) c.stop_gap_tol = number(j.at("stop_gap_tol"), child(p, "stop_gap_tol"));
  if (j.contains("ub_confidence")) c.ub_confidence = number(j.at("ub_confidence"), child(p, "ub_confidence"));
  if (j.contains("threads")) c.threads = count(j.at("threads"), child(p, "threads"));
  try {
    c.validate();
  } catch (const Error& e) {
    schema_error(p + ": " + e.what());
  }
  return c;
}

json system_json(const hydro::SystemCase& s) {
  json j;
  j["buses"] = json::array();
  for (const hydro::Bus& b : s.buses) j["buses"].push_back({{"name", b.name}, {"demand", b.demand}});
  j["lines"] = json::array();
  for (const hydro::Line& l : s.lines) {
    j["lines"].push_back({{"from", s.buses.at(l.from).name}, {"to", s.buses.at(l.to).name},
                          {"capacity", l.capacity}});
  }
  j["thermals"] = json::array();
  for (const hydro::Thermal& g : s.thermals) {
    j["thermals"].push_back({{"name", g.name}, {"bus", s.buses.at(g.bus).name}, {"cost", g.cost},
                             {"capacity", g.capacity}});
  }
  j["hydros"] = json::array();
  for (const hydro::HydroPlant& h : s.hydros) {
    json up = json::array();
    for (std::size_t u : h.upstream) up.push_back(s.hydros.at(u).name);
    j["hydros"].push_back({{"name", h.name},
                           {"bus", s.buses.at(h.bus).name},
                           {"max_storage", h.max_storage},
                           {"max_turbine", h.max_turbine},
                           {"production", h.production},
                           {"upstream", up},
                           {"ar_coefficients", h.ar_coefficients},
                           {"initial_storage", h.initial_storage},
                           {"initial_inflows", h.initial_inflows}});
  }
  j["renewables"] = json::array();
  for (const hydro::Renewable& r : s.renewables) {
    j["renewables"].push_back({{"name", r.name}, {"bus", s.buses.at(r.bus).name}});
  }
  if (s.deficit_cost) j["deficit_cost"] = *s.deficit_cost;
  j["beta_lower_bound"] = s.beta_lower_bound;
  return j;
}

json lattice_json(const scenario::Lattice& lattice) {
  json noises = json::array();
  for (const auto& stage : lattice.noises()) {
    json row = json::array();
    for (const scenario::NoiseRealization& n : stage) {
      json e{{"inflow", n.inflow}, {"renewable_cap", n.renewable_cap}};
      if (n.demand) e["demand"] = *n.demand;
      row.push_back(std::move(e));
    }
    noises.push_back(std::move(row));
  }
  return {{"stages", lattice.stages()}, {"openings", lattice.openings()}, {"noises", std::move(noises)}};
}

json config_json(const sddp::EngineConfig& c) {
  return {{"lambda", c.measure.lambda()},
          {"alpha", c.measure.alpha()},
          {"max_iterations", c.max_iterations},
          {"min_iterations", c.min_iterations},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"sampler", std::string(scenario::to_string(c.sampler))},
          {"stop_gap_tol", c.stop_gap_tol},
          {"ub_confidence", c.ub_confidence},
          {"threads", c.threads}};
}

json parse_json(std::string_view text, ErrorCode code) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(code, std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

CaseFile parse_case_text(std::string_view text) {
  const json doc = parse_json(text, ErrorCode::SchemaError);
  object(doc, "", {"schema_version", "system", "lattice", "defaults"},
         {"schema_version", "system", "lattice"});
  if (count(doc.at("schema_version"), "schema_version") != static_cast<std::uint64_t>(kSchemaVersion)) {
    schema_error("unsupported schema_version; expected " + std::to_string(kSchemaVersion));
  }
  CaseFile c;
  c.system = parse_system(doc.at("system"));
  c.lattice = parse_lattice(doc.at("lattice"));
  if (doc.contains("defaults")) c.defaults = parse_config(doc.at("defaults"), "defaults");
  try {
    c.system.validate_lattice(c.lattice);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) throw;
    schema_error(std::string("lattice: ") + e.what());
  }
  return c;
}

CaseFile parse_case(const std::filesystem::path& path) { return parse_case_text(read_file(path)); }

std::string serialize_case(const CaseFile& c) {
  const json doc{{"schema_version", kSchemaVersion},
                 {"system", system_json(c.system)},
                 {"lattice", lattice_json(c.lattice)},
                 {"defaults", config_json(c.defaults)}};
  return doc.dump(2) + "\n";
}

std::string fingerprint(const hydro::SystemCase& system, const scenario::Lattice& lattice) {
  const std::string canonical =
      json{{"system", system_json(system)}, {"lattice", lattice_json(lattice)}}.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string serialize_policy(const sddp::TrainedPolicy& policy) {
  json bounds = json::array();
  for (const sddp::BoundsEntry& b : policy.bounds) {
    json e{{"iteration", b.iteration},
           {"lower_bound", b.lower_bound},
           {"sampler", std::string(scenario::to_string(b.sampler))},
           {"wall_ms", b.wall_ms}};
    if (b.upper) {
      e["ub_mean"] = b.upper->mean;
      e["ub_stderr"] = b.upper->std_error;
      e["ub_samples"] = b.upper->samples;
    }
    bounds.push_back(std::move(e));
  }
  const CutPool& pool = policy.cuts;
  json entries = json::array();
  for (std::size_t t = 0; t + 1 < pool.stages(); ++t) {
    for (std::size_t l = 0; l < pool.openings(); ++l) {
      for (const Cut& c : pool.cuts(t, l)) {
        entries.push_back({{"stage", t},
                           {"opening", l},
                           {"gradient", c.gradient},
                           {"anchor", c.anchor},
                           {"intercept", c.intercept}});
      }
    }
  }
  const json doc{{"format", "rasddp-policy"},
                 {"version", 1},
                 {"fingerprint", policy.fingerprint},
                 {"config", config_json(policy.config)},
                 {"bounds", std::move(bounds)},
                 {"cuts",
                  {{"stages", pool.stages()},
                   {"openings", pool.openings()},
                   {"dimension", pool.dimension()},
                   {"entries", std::move(entries)}}}};
  return doc.dump(1) + "\n";
}

sddp::TrainedPolicy parse_policy(std::string_view text, const std::string& expected_fingerprint) {
  const json doc = parse_json(text, ErrorCode::CorruptFile);
  sddp::TrainedPolicy policy;
  try {
    if (doc.at("format").get<std::string>() != "rasddp-policy" || doc.at("version").get<int>() != 1) {
      throw Error(ErrorCode::CorruptFile, "not a version 1 policy file");
    }
    policy.fingerprint = doc.at("fingerprint").get<std::string>();
    if (policy.fingerprint != expected_fingerprint) {
      throw Error(ErrorCode::FingerprintMismatch, "policy was trained on a different case (" +
                                                      policy.fingerprint + " vs " +
                                                      expected_fingerprint + ")");
    }
    policy.config = parse_config(doc.at("config"), "config");
    for (const json& e : doc.at("bounds")) {
      sddp::BoundsEntry b;
      b.iteration = e.at("iteration").get<std::size_t>();
      b.lower_bound = e.at("lower_bound").get<double>();
      b.sampler = scenario::parse_sampler_mode(e.at("sampler").get<std::string>());
      b.wall_ms = e.at("wall_ms").get<double>();
      if (e.contains("ub_mean")) {
        b.upper = sddp::UpperBound{e.at("ub_mean").get<double>(), e.at("ub_stderr").get<double>(),
                                   e.at("ub_samples").get<std::size_t>()};
      }
      policy.bounds.push_back(b);
    }
    const json& cuts = doc.at("cuts");
    policy.cuts = CutPool(cuts.at("stages").get<std::size_t>(), cuts.at("openings").get<std::size_t>(),
                          cuts.at("dimension").get<std::size_t>());
    for (const json& e : cuts.at("entries")) {
      policy.cuts.add(e.at("stage").get<std::size_t>(), e.at("opening").get<std::size_t>(),
                      Cut{e.at("gradient").get<std::vector<double>>(),
                          e.at("anchor").get<std::vector<double>>(), e.at("intercept").get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("policy file: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::FingerprintMismatch || e.code() == ErrorCode::CorruptFile) throw;
    throw Error(ErrorCode::CorruptFile, std::string("policy file: ") + e.what());
  }
  return policy;
}

void write_policy(const sddp::TrainedPolicy& policy, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_policy(policy));
}

sddp::TrainedPolicy read_policy(const std::filesystem::path& path,
                                const std::string& expected_fingerprint) {
  return parse_policy(read_file(path), expected_fingerprint);
}

std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

std::string bounds_csv(const sddp::BoundsLog& log) {
  std::string out = "iteration,lower_bound,ub_mean,ub_stderr,ub_samples,sampler,wall_ms\n";
  for (const sddp::BoundsEntry& b : log) {
    out += std::to_string(b.iteration) + "," + format_double(b.lower_bound) + ",";
    if (b.upper) {
      out += format_double(b.upper->mean) + "," + format_double(b.upper->std_error) + "," +
             std::to_string(b.upper->samples);
    } else {
      out += ",,";
    }
    char wall[64];
    std::snprintf(wall, sizeof wall, "%.3f", b.wall_ms);
    out += "," + std::string(scenario::to_string(b.sampler)) + "," + wall + "\n";
  }
  return out;
}

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    fields.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return fields;
    start = pos + 1;
  }
}

template <class T>
T parse_field(const std::string& field, std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorCode::CorruptFile, "bad CSV field '" + field + "' on line " + std::to_string(line));
  }
  return value;
}

}  // namespace

sddp::BoundsLog parse_bounds_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) ||
      line != "iteration,lower_bound,ub_mean,ub_stderr,ub_samples,sampler,wall_ms") {
    throw Error(ErrorCode::CorruptFile, "missing convergence CSV header");
  }
  sddp::BoundsLog log;
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7) throw Error(ErrorCode::CorruptFile, "wrong field count on line " + std::to_string(n));
    sddp::BoundsEntry b;
    b.iteration = parse_field<std::size_t>(f[0], n);
    b.lower_bound = parse_field<double>(f[1], n);
    if (!f[2].empty()) {
      b.upper = sddp::UpperBound{parse_field<double>(f[2], n), parse_field<double>(f[3], n),
                                 parse_field<std::size_t>(f[4], n)};
    }
    try {
      b.sampler = scenario::parse_sampler_mode(f[5]);
    } catch (const Error&) {
      throw Error(ErrorCode::CorruptFile, "bad sampler on line " + std::to_string(n));
    }
    b.wall_ms = parse_field<double>(f[6], n);
    log.push_back(b);
  }
  return log;
}

std::string convergence_svg(const sddp::BoundsLog& log, double z) {
  constexpr double kWidth = 800, kHeight = 480, kLeft = 90, kRight = 30, kTop = 50, kBottom = 60;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const sddp::BoundsEntry& b : log) {
    lo = std::min(lo, b.lower_bound);
    hi = std::max(hi, b.lower_bound);
    if (b.upper) {
      lo = std::min(lo, b.upper->mean - z * b.upper->std_error);
      hi = std::max(hi, b.upper->mean + z * b.upper->std_error);
    }
  }
  if (log.empty()) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    const double pad = std::max(1.0, std::abs(hi)) * 0.05;
    lo -= pad;
    hi += pad;
  }
  const double first = log.empty() ? 1.0 : static_cast<double>(log.front().iteration);
  const double last = log.empty() ? 2.0 : std::max(first + 1.0, static_cast<double>(log.back().iteration));
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double it) { return kLeft + (it - first) / (last - first) * plot_w; };
  auto py = [&](double v) { return kTop + (hi - v) / (hi - lo) * plot_h; };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  auto label = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"480\" viewBox=\"0 0 800 480\" "
         "font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"800\" height=\"480\" fill=\"white\"/>\n";
  svg += "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">Convergence</text>\n";
  svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(plot_w) + "\" height=\"" +
         num(plot_h) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double v = lo + (hi - lo) * k / 5.0;
    svg += "<line x1=\"" + num(kLeft) + "\" x2=\"" + num(kLeft + plot_w) + "\" y1=\"" + num(py(v)) +
           "\" y2=\"" + num(py(v)) + "\" stroke=\"#ddd\"/>\n";
    svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(py(v) + 4) + "\" text-anchor=\"end\">" + label(v) +
           "</text>\n";
    const double it = first + (last - first) * k / 5.0;
    svg += "<text x=\"" + num(px(it)) + "\" y=\"" + num(kTop + plot_h + 18) + "\" text-anchor=\"middle\">" +
           label(std::round(it)) + "</text>\n";
  }
  svg += "<text x=\"400\" y=\"" + num(kHeight - 15) + "\" text-anchor=\"middle\">iteration</text>\n";
  svg += "<text x=\"20\" y=\"" + num(kTop + plot_h / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
         num(kTop + plot_h / 2) + ")\">cost</text>\n";

  std::string points;
  for (const sddp::BoundsEntry& b : log) {
    points += num(px(static_cast<double>(b.iteration))) + "," + num(py(b.lower_bound)) + " ";
  }
  if (!points.empty()) points.pop_back();
  svg += "<polyline fill=\"none\" stroke=\"#1f5fbf\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
  for (const sddp::BoundsEntry& b : log) {
    if (!b.upper) continue;
    const double x = px(static_cast<double>(b.iteration));
    const double m = b.upper->mean;
    const double e = z * b.upper->std_error;
    svg += "<line x1=\"" + num(x) + "\" x2=\"" + num(x) + "\" y1=\"" + num(py(m - e)) + "\" y2=\"" +
           num(py(m + e)) + "\" stroke=\"#c0392b\"/>\n";
    svg += "<circle cx=\"" + num(x) + "\" cy=\"" + num(py(m)) + "\" r=\"3\" fill=\"#c0392b\"/>\n";
  }
  svg += "<line x1=\"110\" x2=\"140\" y1=\"42\" y2=\"42\" stroke=\"#1f5fbf\" stroke-width=\"2\"/>"
         "<text x=\"146\" y=\"46\">lower bound</text>\n";
  svg += "<circle cx=\"260\" cy=\"42\" r=\"3\" fill=\"#c0392b\"/>"
         "<text x=\"268\" y=\"46\">upper bound estimate</text>\n";
  svg += "</svg>\n";
  return svg;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot replace " + path.string());
  }
}

}  // namespace rasddp::io

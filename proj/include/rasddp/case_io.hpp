#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "rasddp/hydrothermal.hpp"
#include "rasddp/scenario.hpp"
#include "rasddp/sddp.hpp"
#include "rasddp/state.hpp"

namespace rasddp::io {

inline constexpr int kSchemaVersion = 1;

/// In-memory case file. The initial state is derived from the hydro plants.
struct CaseFile {
  hydro::SystemCase system;
  scenario::Lattice lattice;
  sddp::EngineConfig defaults;

  StateVector initial_state() const { return system.initial_state(); }
  friend bool operator==(const CaseFile&, const CaseFile&) = default;
};

/// Parses and validates a case document. Unknown keys raise SchemaError naming
/// the offending field path.
CaseFile parse_case_text(std::string_view text);
CaseFile parse_case(const std::filesystem::path& path);

/// Canonical JSON text; parse_case_text(serialize_case(c)) == c.
std::string serialize_case(const CaseFile& c);

/// 16 hex digits of FNV-1a 64 over the key-sorted compact JSON of system and lattice.
std::string fingerprint(const hydro::SystemCase& system, const scenario::Lattice& lattice);

std::string serialize_policy(const sddp::TrainedPolicy& policy);
/// Reads a policy and checks it against `expected_fingerprint`.
/// Throws CorruptFile or FingerprintMismatch.
sddp::TrainedPolicy parse_policy(std::string_view text, const std::string& expected_fingerprint);
void write_policy(const sddp::TrainedPolicy& policy, const std::filesystem::path& path);
sddp::TrainedPolicy read_policy(const std::filesystem::path& path,
                                const std::string& expected_fingerprint);

/// Columns: iteration,lower_bound,ub_mean,ub_stderr,ub_samples,sampler,wall_ms.
std::string bounds_csv(const sddp::BoundsLog& log);
sddp::BoundsLog parse_bounds_csv(std::string_view text);

/// Standalone SVG with the lower-bound curve and upper-bound means with
/// confidence bars at `z` standard errors.
std::string convergence_svg(const sddp::BoundsLog& log, double z = 1.96);

std::string read_file(const std::filesystem::path& path);
/// Writes through a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

}  // namespace rasddp::io

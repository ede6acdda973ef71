#pragma once

#include <iosfwd>

namespace rasddp::cli {

/// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rasddp::cli

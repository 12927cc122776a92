#pragma once

#include <iosfwd>

namespace roughop::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNumerical = 2, kCriteriaFailed = 3 };

/// Parses argv, runs the subcommand and returns the process exit code.
/// Reports go to files; progress and check lines to `out`, diagnostics to `err`.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace roughop::cli

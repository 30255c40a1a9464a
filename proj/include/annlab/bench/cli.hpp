#pragma once

#include <iosfwd>

namespace annlab::bench {

/// Exit codes of the annlab tool.
enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInvariant = 3 };

/// Runs the annlab command line. Reports go to `out` unless --out names a
/// file; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace annlab::bench

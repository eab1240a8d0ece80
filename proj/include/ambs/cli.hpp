#pragma once

#include <ostream>

namespace ambs {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitUnsat = 1, kExitUsage = 2 };

/// Runs `ambs <subcommand> ...` with output on `out` and diagnostics on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ambs

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fluxnet {

/// Process exit statuses of the fluxnet tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitUnstable = 3,
  kExitNonfinite = 4,
  kExitViolation = 5,
};

/// Runs the command line `args` (without the program name). Output goes to
/// `out`, diagnostics and the resolved configuration to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace fluxnet

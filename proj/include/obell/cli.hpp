#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace obell::cli {

/// Process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kAssertionFailure = 1,  // a bound was exceeded or an optimizer fell short
  kUsageError = 2,        // bad arguments or configuration
};

/// Runs the obell command line. `args` includes the program name. All output
/// goes to `out` and `err`; files are written only below --out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace obell::cli

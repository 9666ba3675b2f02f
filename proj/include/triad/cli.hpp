#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace triad::cli {

/// Exit statuses shared by every command.
enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,     // fit did not converge, or an unexpected error
  kValidation = 2,  // bad arguments, config, or domain error
  kIo = 3,          // unreadable input / unwritable output
  kParse = 4,       // malformed input file
};

/// Runs the command line `args` (args[0] is the program name) and returns the
/// exit status. Diagnostics go to `err`, summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace triad::cli

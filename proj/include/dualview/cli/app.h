#pragma once

#include <iosfwd>

namespace dualview::cli {

enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,  // bad flags or configuration
  kDataError = 2,   // unreadable or invalid input files
  kNumericalError = 3,
};

// Parses argv, dispatches one subcommand and maps failures to exit codes. Errors
// are reported as one JSON object per line on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dualview::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hyperflats::cli {

enum ExitCode : int { kSuccess = 0, kInvalidArguments = 2, kNumericalFailure = 3 };

/// Runs one command line (without the program name). Results go to `out`,
/// diagnostics to `err`; the return value is the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hyperflats::cli

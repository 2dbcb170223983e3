#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace osclab::cli {

enum ExitCode : int { kSuccess = 0, kRuntimeError = 1, kUsageError = 2 };

/// Runs the `osclab` command line (args exclude the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace osclab::cli

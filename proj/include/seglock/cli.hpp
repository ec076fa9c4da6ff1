#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace seglock::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kMetricUndefined = 3 };

/// Runs the command line `args` (without the program name). Normal output
/// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace seglock::cli

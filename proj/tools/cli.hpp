#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fxrange::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,    // bad arguments, unreadable or malformed input files
    kFailure = 2,  // analysis error or a failed verification
};

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fxrange::cli

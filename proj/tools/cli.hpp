#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lwgnn::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 1,
    kDataError = 2,
    kNumericError = 3,
    kGradientMismatch = 4,
};

// Parses `args` (without the program name) and runs one subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lwgnn::cli

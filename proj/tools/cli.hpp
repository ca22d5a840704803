#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vortexlab::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kNumerical = 3 };

// Runs one subcommand. args excludes the program name. Diagnostics go to `err`,
// progress lines to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vortexlab::cli

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace commsense::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitEmpty = 3,
  kExitNumerical = 4,
};

/// Runs one `commsense` invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace commsense::cli

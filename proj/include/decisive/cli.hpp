#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace decisive::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInternal = 1,
  kUsage = 2,
  kValidation = 3,
  kIo = 4,
};

/// Runs one invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace decisive::cli

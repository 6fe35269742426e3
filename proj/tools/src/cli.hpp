#pragma once

#include <string>
#include <vector>

namespace crashdyn::cli {

enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,
  kDataError = 2,
  kNumericalFailure = 3,
};

/// Entry point of the `crashdyn` tool; args[0] is the program name.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace crashdyn::cli

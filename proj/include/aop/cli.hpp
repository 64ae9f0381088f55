#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aop::cli {

/// Stable process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsageError = 1,
  kDataError = 2,
  kNumericalError = 3,
};

/// Runs `aop <subcommand> ...`; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace aop::cli

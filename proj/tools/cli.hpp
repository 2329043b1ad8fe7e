#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qkd::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kNoSecureWindow = 3,
  kReconciliationFailed = 4,
};

/// Runs one command. args[0] is the program name, args[1] the subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qkd::cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace umskel {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// Runs one invocation; args[0] is the program name. Reads "-" or a missing
/// --input from `in`.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace umskel

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xmover {

// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntimeError = 1;
inline constexpr int kExitUsageError = 2;

// Runs the command-line tool. `args` includes the program name, as argv does.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xmover
